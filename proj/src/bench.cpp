#include "mxm/bench.hpp"

#include "mxm/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace mxm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

BenchRow bench_point_set(std::span<const Vec3> points, double dl, double dg) {
  if (!(dl > 0.0 && dl < dg))
    throw std::invalid_argument("bench: need 0 < dl < dg");
  BenchRow row;
  row.nodes = points.size();

  auto t0 = std::chrono::steady_clock::now();
  MultiplexGraph g;
  g.n_nodes = points.size();
  g.local_edges = neighbor_search(points, dl);
  g.global_edges = neighbor_search(points, dg);
  const auto triples = enumerate_angle_triples(g);
  row.mxm_seconds = seconds_since(t0);

  row.edges_local = g.local_edges.size();
  row.edges_global = g.global_edges.size();
  row.two_hop = triples.two_hop.size();
  row.one_hop = triples.one_hop.size();
  row.counts = count_messages(g);
  if (row.nodes > 0) {
    row.k_local = static_cast<double>(row.edges_local) / static_cast<double>(row.nodes);
    row.k_global = static_cast<double>(row.edges_global) / static_cast<double>(row.nodes);
  }

  // Reference: angles over the global layer.
  t0 = std::chrono::steady_clock::now();
  MultiplexGraph ref;
  ref.n_nodes = g.n_nodes;
  ref.local_edges = g.global_edges;
  row.ref_triples = enumerate_angle_triples(ref).two_hop.size();
  row.ref_messages = row.ref_triples + row.edges_global;
  row.ref_seconds = seconds_since(t0);
  return row;
}

std::vector<BenchRow> run_bench(const BenchOptions &opt) {
  struct Job {
    std::size_t nodes;
    double degree;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (auto n : opt.nodes)
    for (double k : opt.degrees)
      for (std::size_t r = 0; r < opt.repeats; ++r)
        jobs.push_back({n, k, r});

  std::vector<BenchRow> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto &job = jobs[j];
    // N (4/3 pi dg^3) / L^3 = k
    const double volume = static_cast<double>(job.nodes) * 4.0 / 3.0 * std::numbers::pi *
                          opt.dg * opt.dg * opt.dg / job.degree;
    const double box = std::cbrt(volume);
    std::mt19937_64 rng(mix(opt.seed ^ mix(job.nodes ^ mix(static_cast<std::uint64_t>(
                                                       job.degree * 1000.0) ^
                                                   mix(job.repeat)))));
    std::uniform_real_distribution<double> u(0.0, box);
    std::vector<Vec3> pts(job.nodes);
    for (auto &p : pts)
      p = {u(rng), u(rng), u(rng)};
    rows[j] = bench_point_set(pts, opt.dl, opt.dg);
    rows[j].box = box;
    rows[j].target_degree = job.degree;
    rows[j].repeat = job.repeat;
  });
  return rows;
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size())
    throw std::invalid_argument("loglog_slope: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0))
      continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom <= 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

std::vector<ScalingFit> fit_scaling(const std::vector<BenchRow> &rows) {
  std::vector<std::size_t> sizes;
  for (const auto &r : rows)
    if (std::find(sizes.begin(), sizes.end(), r.nodes) == sizes.end())
      sizes.push_back(r.nodes);

  std::vector<ScalingFit> fits;
  for (auto n : sizes) {
    std::vector<double> kl, kg, tri, glob, ref;
    for (const auto &r : rows)
      if (r.nodes == n) {
        kl.push_back(r.k_local);
        kg.push_back(r.k_global);
        tri.push_back(static_cast<double>(r.two_hop));
        glob.push_back(static_cast<double>(r.counts.global));
        ref.push_back(static_cast<double>(r.ref_triples));
      }
    auto add = [&](const char *q, const char *v, const std::vector<double> &x,
                   const std::vector<double> &y) {
      std::size_t used = 0;
      for (std::size_t i = 0; i < x.size(); ++i)
        used += x[i] > 0.0 && y[i] > 0.0;
      fits.push_back({n, q, v, loglog_slope(x, y), used});
    };
    add("local_triples", "k_local", kl, tri);
    add("global_messages", "k_global", kg, glob);
    add("reference_triples", "k_global", kg, ref);
  }
  return fits;
}

void write_bench_csv(std::ostream &out, const std::vector<BenchRow> &rows) {
  out << "nodes,box,target_degree,repeat,k_local,k_global,edges_local,edges_global,"
         "two_hop,one_hop,msg_global,msg_step1,msg_step2,msg_step3,msg_cross,msg_total,"
         "ref_triples,ref_messages,mxm_seconds,ref_seconds\n";
  char buf[512];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%zu,%.6f,%g,%zu,%.6f,%.6f,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu,"
                  "%.6f,%.6f\n",
                  r.nodes, r.box, r.target_degree, r.repeat, r.k_local, r.k_global,
                  r.edges_local, r.edges_global, r.two_hop, r.one_hop, r.counts.global,
                  r.counts.local_step1, r.counts.local_step2, r.counts.local_step3,
                  r.counts.cross, r.counts.total(), r.ref_triples, r.ref_messages,
                  r.mxm_seconds, r.ref_seconds);
    out << buf;
  }
}

void write_scaling_csv(std::ostream &out, const std::vector<ScalingFit> &fits) {
  out << "nodes,quantity,versus,slope,points\n";
  char buf[256];
  for (const auto &f : fits) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.6f,%zu\n", f.nodes, f.quantity.c_str(),
                  f.versus.c_str(), f.slope, f.points);
    out << buf;
  }
}

} // namespace mxm
