#pragma once

#include "mxm/molecule.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mxm {

/// Directed edge src -> dst, i.e. a message from node src to node dst.
struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;

  friend bool operator==(const Edge &, const Edge &) = default;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

using EdgeList = std::vector<Edge>;

/// Above this many atoms neighbor_search switches from the all-pairs scan to
/// a uniform cell grid.
inline constexpr std::size_t kBruteForceLimit = 512;

/// All directed pairs with 0 < |r_src - r_dst| < cutoff, sorted by (src, dst).
/// Throws std::invalid_argument on a non-positive cutoff or non-finite
/// coordinates.
EdgeList neighbor_search(std::span<const Vec3> coords, double cutoff);
EdgeList neighbor_search_all_pairs(std::span<const Vec3> coords, double cutoff);
EdgeList neighbor_search_cells(std::span<const Vec3> coords, double cutoff);

/// Explicit bonds when the molecule has them, otherwise pairs closer than
/// r_cov(Z_i) + r_cov(Z_j) + kBondTolerance.
inline constexpr double kBondTolerance = 0.3;
std::vector<Bond> derive_bonds(const Molecule &m);

/// Both directions of every bond, sorted by (src, dst).
EdgeList edges_from_bonds(std::span<const Bond> bonds);

struct LocalRule {
  bool use_bonds = true;
  double cutoff = 0.0; // Angstrom, used when !use_bonds

  static LocalRule bonds() { return {true, 0.0}; }
  static LocalRule within(double cutoff) { return {false, cutoff}; }
};

struct MultiplexOptions {
  LocalRule local = LocalRule::bonds();
  double global_cutoff = 5.0;
  /// Drop pairs that are already local edges from the global layer.
  bool global_excludes_local = false;
};

struct MultiplexGraph {
  std::size_t n_nodes = 0;
  EdgeList local_edges;
  EdgeList global_edges;
  std::string local_provenance;
  std::string global_provenance;

  /// Throws std::logic_error if either layer has a self edge, an index out of
  /// range, or a directed edge without its reverse.
  void validate() const;
};

MultiplexGraph build_multiplex(const Molecule &m, const MultiplexOptions &opt);

/// Angle at `center` between `first` and `last`, attached to the directed
/// message edge first->center and the target edge it updates.
///
///   two-hop (k, j, i): message edge k->j updates edge j->i, k != i
///   one-hop (j', i, j): message edge j'->i updates edge j->i, j' != j
struct AngleTriple {
  std::size_t first = 0;
  std::size_t center = 0;
  std::size_t last = 0;
  std::size_t message_edge = 0; // index into local_edges
  std::size_t target_edge = 0;  // index into local_edges

  friend bool operator==(const AngleTriple &, const AngleTriple &) = default;
};

struct AngleTriples {
  std::vector<AngleTriple> two_hop;
  std::vector<AngleTriple> one_hop;
};

/// Exhaustive enumeration over the local layer, ordered by target edge.
AngleTriples enumerate_angle_triples(const MultiplexGraph &g);

/// Number of angles formed by pairs of edges sharing a node:
/// sum over v of deg(v) (deg(v) - 1) / 2.
std::size_t count_angles(std::size_t n_nodes, std::span<const Bond> edges);
/// Same for a symmetric directed edge list (each undirected edge twice).
std::size_t count_angles(std::size_t n_nodes, const EdgeList &edges);

/// Messages computed by one MXM module on a graph.
struct MessageCounts {
  std::size_t global = 0;      // two passes over E_g
  std::size_t local_step1 = 0; // two-hop triples + E_l
  std::size_t local_step2 = 0; // one-hop triples + E_l
  std::size_t local_step3 = 0; // E_l
  std::size_t cross = 0;       // two cross-layer maps, N each

  std::size_t total() const {
    return global + local_step1 + local_step2 + local_step3 + cross;
  }
  friend bool operator==(const MessageCounts &, const MessageCounts &) = default;
};

/// Closed-form counts from node degrees; does not enumerate triples.
MessageCounts count_messages(const MultiplexGraph &g);

/// Text dump: one "L j i" line per local edge, then "G j i" per global edge.
void write_graph_dump(std::ostream &out, const MultiplexGraph &g);

} // namespace mxm
