#pragma once

#include "mxm/graph.hpp"
#include "mxm/ops.hpp"

namespace mxm {

struct FeatureOptions {
  MultiplexOptions graph;
  /// Basis cutoff for bond-derived local layers. Cutoff-derived local layers
  /// use their own cutoff; the global layer always uses graph.global_cutoff.
  double local_basis_cutoff = 5.0;

  double local_cutoff() const {
    return graph.local.use_bonds ? local_basis_cutoff : graph.local.cutoff;
  }
};

/// Everything the model reads from one molecule: species rows, edge index
/// vectors, and constant basis tensors.
///
/// Two-hop SBF rows embed (|r_k - r_j|, angle k-j-i); one-hop rows embed
/// (|r_j' - r_i|, angle j'-i-j), i.e. the length of the message edge and the
/// angle at the shared node.
struct Features {
  std::size_t n_atoms = 0;
  ad::Index species; // Z - 1

  MultiplexGraph graph;
  AngleTriples triples;

  ad::Index local_src, local_dst;
  ad::Tensor rbf_local; // [E_l x 16]
  ad::Index global_src, global_dst;
  ad::Tensor rbf_global; // [E_g x 16]

  ad::Index two_hop_message, two_hop_target;
  ad::Tensor sbf_two_hop; // [T2 x 42]
  ad::Index one_hop_message, one_hop_target;
  ad::Tensor sbf_one_hop; // [T1 x 42]
};

Features featurize(const Molecule &m, const FeatureOptions &opt);

/// Same, for a graph built elsewhere (tests, tampered inputs).
Features featurize(const Molecule &m, MultiplexGraph graph,
                   const FeatureOptions &opt);

} // namespace mxm
