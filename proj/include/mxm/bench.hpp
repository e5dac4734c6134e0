#pragma once

#include "mxm/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mxm {

/// Message statistics of one random point set under both schemes.
///
/// The MXM scheme uses a cutoff local layer (angles) plus a global layer
/// (distances only). The reference scheme computes two-hop angles over the
/// global layer itself, as an all-global angle-aware model would.
struct BenchRow {
  std::size_t nodes = 0;
  double box = 0.0;
  double target_degree = 0.0;
  std::size_t repeat = 0;
  double k_local = 0.0; // mean local degree
  double k_global = 0.0;
  std::size_t edges_local = 0; // directed
  std::size_t edges_global = 0;
  std::size_t two_hop = 0; // enumerated
  std::size_t one_hop = 0;
  MessageCounts counts; // closed form
  std::size_t ref_triples = 0;
  std::size_t ref_messages = 0; // ref_triples + directed global edges
  double mxm_seconds = 0.0;
  double ref_seconds = 0.0;
};

BenchRow bench_point_set(std::span<const Vec3> points, double dl, double dg);

struct BenchOptions {
  std::vector<std::size_t> nodes{512};
  /// Target mean global degrees; the box side is chosen so that a uniform
  /// point cloud has this many neighbors within dg on average.
  std::vector<double> degrees{6, 12, 24, 48};
  std::size_t repeats = 3;
  double dl = 2.0;
  double dg = 5.0;
  std::uint64_t seed = 0;
};

std::vector<BenchRow> run_bench(const BenchOptions &opt);

/// Least-squares slope of log(y) against log(x) over points with x, y > 0.
/// NaN when fewer than two such points exist.
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

struct ScalingFit {
  std::size_t nodes = 0;
  std::string quantity;
  std::string versus;
  double slope = 0.0;
  std::size_t points = 0;
};

/// Per node count: local two-hop triples vs k_local, global messages vs
/// k_global, reference triples vs k_global.
std::vector<ScalingFit> fit_scaling(const std::vector<BenchRow> &rows);

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows);
void write_scaling_csv(std::ostream &out, const std::vector<ScalingFit> &fits);

} // namespace mxm
