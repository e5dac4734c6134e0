#include "mxm/features.hpp"

#include "mxm/basis.hpp"

namespace mxm {

namespace {

ad::Tensor edge_rbf(const Molecule &m, const EdgeList &edges, double cutoff,
                    ad::Index &src, ad::Index &dst) {
  std::vector<double> values(edges.size() * basis::kNumRadial);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    src.push_back(edges[e].src);
    dst.push_back(edges[e].dst);
    const double d = basis::distance(m.coords[edges[e].src], m.coords[edges[e].dst]);
    basis::rbf(d, cutoff,
               std::span<double>(values).subspan(e * basis::kNumRadial, basis::kNumRadial));
  }
  return ad::Tensor::from({edges.size(), std::size_t{basis::kNumRadial}},
                          std::move(values));
}

ad::Tensor triple_sbf(const Molecule &m, const std::vector<AngleTriple> &triples,
                      double cutoff, ad::Index &message, ad::Index &target) {
  std::vector<double> values(triples.size() * basis::kSbfSize);
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const auto &tr = triples[t];
    message.push_back(tr.message_edge);
    target.push_back(tr.target_edge);
    const auto &a = m.coords[tr.first];
    const auto &b = m.coords[tr.center];
    const auto &c = m.coords[tr.last];
    basis::sbf(basis::distance(a, b), basis::angle(a, b, c), cutoff,
               std::span<double>(values).subspan(t * basis::kSbfSize, basis::kSbfSize));
  }
  return ad::Tensor::from({triples.size(), std::size_t{basis::kSbfSize}},
                          std::move(values));
}

} // namespace

Features featurize(const Molecule &m, MultiplexGraph graph,
                   const FeatureOptions &opt) {
  m.validate();
  graph.validate();
  if (graph.n_nodes != m.size())
    throw std::invalid_argument("featurize: graph has " +
                                std::to_string(graph.n_nodes) + " nodes, molecule has " +
                                std::to_string(m.size()) + " atoms");
  Features f;
  f.n_atoms = m.size();
  for (int z : m.atomic_numbers)
    f.species.push_back(static_cast<std::size_t>(z - 1));
  f.triples = enumerate_angle_triples(graph);
  const double local_cut = opt.local_cutoff();
  f.rbf_local = edge_rbf(m, graph.local_edges, local_cut, f.local_src, f.local_dst);
  f.rbf_global = edge_rbf(m, graph.global_edges, opt.graph.global_cutoff,
                          f.global_src, f.global_dst);
  f.sbf_two_hop = triple_sbf(m, f.triples.two_hop, local_cut, f.two_hop_message,
                             f.two_hop_target);
  f.sbf_one_hop = triple_sbf(m, f.triples.one_hop, local_cut, f.one_hop_message,
                             f.one_hop_target);
  f.graph = std::move(graph);
  return f;
}

Features featurize(const Molecule &m, const FeatureOptions &opt) {
  return featurize(m, build_multiplex(m, opt.graph), opt);
}

} // namespace mxm
