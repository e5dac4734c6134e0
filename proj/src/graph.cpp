#include "mxm/graph.hpp"

#include "mxm/elements.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mxm {

namespace {

double dist(const Vec3 &a, const Vec3 &b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void check_inputs(std::span<const Vec3> coords, double cutoff) {
  if (!(cutoff > 0.0) || !std::isfinite(cutoff))
    throw std::invalid_argument("neighbor_search: cutoff must be positive and finite");
  for (std::size_t i = 0; i < coords.size(); ++i)
    for (double c : coords[i])
      if (!std::isfinite(c))
        throw std::invalid_argument("neighbor_search: non-finite coordinate on atom " +
                                    std::to_string(i));
}

std::string format_cutoff(double c) {
  std::ostringstream os;
  os << "cutoff=" << c;
  return os.str();
}

} // namespace

EdgeList neighbor_search_all_pairs(std::span<const Vec3> coords, double cutoff) {
  check_inputs(coords, cutoff);
  EdgeList edges;
  const std::size_t n = coords.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j)
        continue;
      const double d = dist(coords[j], coords[i]);
      if (d > 0.0 && d < cutoff)
        edges.push_back({j, i});
    }
  return edges;
}

EdgeList neighbor_search_cells(std::span<const Vec3> coords, double cutoff) {
  check_inputs(coords, cutoff);
  const std::size_t n = coords.size();
  if (n == 0)
    return {};

  Vec3 lo = coords[0];
  for (const auto &r : coords)
    for (int k = 0; k < 3; ++k)
      lo[k] = std::min(lo[k], r[k]);

  // Cells of edge `cutoff`; only the 27 surrounding cells can hold neighbors.
  using Cell = std::array<std::int64_t, 3>;
  auto cell_of = [&](const Vec3 &r) {
    Cell c{};
    for (int k = 0; k < 3; ++k)
      c[k] = static_cast<std::int64_t>(std::floor((r[k] - lo[k]) / cutoff));
    return c;
  };
  auto key = [](const Cell &c) {
    return (static_cast<std::uint64_t>(c[0]) * 73856093ULL) ^
           (static_cast<std::uint64_t>(c[1]) * 19349663ULL) ^
           (static_cast<std::uint64_t>(c[2]) * 83492791ULL);
  };
  struct Bucket {
    Cell cell;
    std::vector<std::size_t> atoms;
  };
  std::unordered_map<std::uint64_t, std::vector<Bucket>> grid;
  std::vector<Cell> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i] = cell_of(coords[i]);
    auto &chain = grid[key(cells[i])];
    auto it = std::find_if(chain.begin(), chain.end(),
                           [&](const Bucket &b) { return b.cell == cells[i]; });
    if (it == chain.end())
      chain.push_back({cells[i], {i}});
    else
      it->atoms.push_back(i);
  }

  EdgeList edges;
  for (std::size_t j = 0; j < n; ++j) {
    const Cell &cj = cells[j];
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const Cell c{cj[0] + dx, cj[1] + dy, cj[2] + dz};
          auto found = grid.find(key(c));
          if (found == grid.end())
            continue;
          for (const auto &bucket : found->second) {
            if (bucket.cell != c)
              continue;
            for (std::size_t i : bucket.atoms) {
              if (i == j)
                continue;
              const double d = dist(coords[j], coords[i]);
              if (d > 0.0 && d < cutoff)
                edges.push_back({j, i});
            }
          }
        }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

EdgeList neighbor_search(std::span<const Vec3> coords, double cutoff) {
  if (coords.size() <= kBruteForceLimit)
    return neighbor_search_all_pairs(coords, cutoff);
  return neighbor_search_cells(coords, cutoff);
}

std::vector<Bond> derive_bonds(const Molecule &m) {
  if (m.bonds)
    return *m.bonds;
  std::vector<Bond> bonds;
  const std::size_t n = m.size();
  std::vector<double> radius(n);
  for (std::size_t i = 0; i < n; ++i)
    radius[i] = covalent_radius(m.atomic_numbers[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(m.coords[i], m.coords[j]);
      if (d < radius[i] + radius[j] + kBondTolerance)
        bonds.push_back({i, j});
    }
  return bonds;
}

EdgeList edges_from_bonds(std::span<const Bond> bonds) {
  EdgeList edges;
  edges.reserve(2 * bonds.size());
  for (const auto &b : bonds) {
    edges.push_back({b.first, b.second});
    edges.push_back({b.second, b.first});
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

void MultiplexGraph::validate() const {
  auto check = [&](const EdgeList &edges, const char *layer) {
    std::set<Edge> present(edges.begin(), edges.end());
    if (present.size() != edges.size())
      throw std::logic_error(std::string(layer) + " layer has duplicate edges");
    for (const auto &e : edges) {
      if (e.src >= n_nodes || e.dst >= n_nodes)
        throw std::logic_error(std::string(layer) + " layer edge index out of range");
      if (e.src == e.dst)
        throw std::logic_error(std::string(layer) + " layer has a self edge");
      if (!present.count({e.dst, e.src}))
        throw std::logic_error(std::string(layer) + " layer is not symmetric");
    }
  };
  check(local_edges, "local");
  check(global_edges, "global");
}

MultiplexGraph build_multiplex(const Molecule &m, const MultiplexOptions &opt) {
  m.validate();
  if (!(opt.global_cutoff > 0.0))
    throw std::invalid_argument("build_multiplex: global cutoff must be positive");
  MultiplexGraph g;
  g.n_nodes = m.size();
  if (opt.local.use_bonds) {
    const auto bonds = derive_bonds(m);
    g.local_edges = edges_from_bonds(bonds);
    g.local_provenance = "bonds";
  } else {
    if (!(opt.local.cutoff > 0.0) || opt.local.cutoff >= opt.global_cutoff)
      throw std::invalid_argument(
          "build_multiplex: local cutoff must be positive and below the global cutoff");
    g.local_edges = neighbor_search(m.coords, opt.local.cutoff);
    g.local_provenance = format_cutoff(opt.local.cutoff);
  }
  g.global_edges = neighbor_search(m.coords, opt.global_cutoff);
  g.global_provenance = format_cutoff(opt.global_cutoff);
  if (opt.global_excludes_local) {
    std::set<Edge> local(g.local_edges.begin(), g.local_edges.end());
    std::erase_if(g.global_edges, [&](const Edge &e) { return local.count(e) > 0; });
    g.global_provenance += " excluding local";
  }
  g.validate();
  return g;
}

AngleTriples enumerate_angle_triples(const MultiplexGraph &g) {
  const auto &edges = g.local_edges;
  std::vector<std::vector<std::size_t>> incoming(g.n_nodes);
  for (std::size_t e = 0; e < edges.size(); ++e)
    incoming[edges[e].dst].push_back(e);

  AngleTriples out;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const std::size_t j = edges[t].src, i = edges[t].dst;
    for (std::size_t e : incoming[j]) {
      const std::size_t k = edges[e].src;
      if (k != i)
        out.two_hop.push_back({k, j, i, e, t});
    }
    for (std::size_t e : incoming[i]) {
      const std::size_t jp = edges[e].src;
      if (jp != j)
        out.one_hop.push_back({jp, i, j, e, t});
    }
  }
  return out;
}

std::size_t count_angles(std::size_t n_nodes, std::span<const Bond> edges) {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto &b : edges) {
    ++deg.at(b.first);
    ++deg.at(b.second);
  }
  std::size_t total = 0;
  for (auto d : deg)
    total += d * (d - (d > 0 ? 1 : 0)) / 2;
  return total;
}

std::size_t count_angles(std::size_t n_nodes, const EdgeList &edges) {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto &e : edges)
    ++deg.at(e.dst);
  std::size_t total = 0;
  for (auto d : deg)
    total += d * (d - (d > 0 ? 1 : 0)) / 2;
  return total;
}

MessageCounts count_messages(const MultiplexGraph &g) {
  std::vector<std::size_t> deg(g.n_nodes, 0);
  for (const auto &e : g.local_edges)
    ++deg[e.dst];
  // Each ordered pair of distinct incident edges at a node is one two-hop
  // triple (viewed from the far end) and one one-hop triple.
  std::size_t ordered_pairs = 0;
  for (auto d : deg)
    ordered_pairs += d * (d > 0 ? d - 1 : 0);
  const std::size_t el = g.local_edges.size();
  MessageCounts c;
  c.global = 2 * g.global_edges.size();
  c.local_step1 = ordered_pairs + el;
  c.local_step2 = ordered_pairs + el;
  c.local_step3 = el;
  c.cross = 2 * g.n_nodes;
  return c;
}

void write_graph_dump(std::ostream &out, const MultiplexGraph &g) {
  for (const auto &e : g.local_edges)
    out << "L " << e.src << ' ' << e.dst << '\n';
  for (const auto &e : g.global_edges)
    out << "G " << e.src << ' ' << e.dst << '\n';
}

} // namespace mxm
