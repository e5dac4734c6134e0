#include "mxm/graph.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

using namespace mxm;

namespace {

// O(N^2) reference with its own distance code.
EdgeList all_pairs_reference(const std::vector<Vec3> &pts, double cutoff) {
  EdgeList out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j)
        continue;
      const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1],
                   dz = pts[i][2] - pts[j][2];
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (d > 0.0 && d < cutoff)
        out.push_back({i, j});
    }
  return out;
}


// Unordered pairs of distinct edges sharing an endpoint, counted one by one.
std::size_t enumerate_adjacent_pairs(const std::vector<Bond> &edges) {
  std::size_t count = 0;
  for (std::size_t a = 0; a < edges.size(); ++a)
    for (std::size_t b = a + 1; b < edges.size(); ++b) {
      const auto &e = edges[a], &f = edges[b];
      if (e.first == f.first || e.first == f.second || e.second == f.first ||
          e.second == f.second)
        ++count;
    }
  return count;
}

MultiplexGraph graph_from_bonds(std::size_t n, const std::vector<Bond> &local,
                                const std::vector<Bond> &global = {}) {
  MultiplexGraph g;
  g.n_nodes = n;
  g.local_edges = edges_from_bonds(local);
  g.global_edges = edges_from_bonds(global);
  return g;
}

using Triple = std::tuple<std::size_t, std::size_t, std::size_t>;

std::set<Triple> as_set(const std::vector<AngleTriple> &v) {
  std::set<Triple> out;
  for (const auto &t : v)
    out.insert({t.first, t.center, t.last});
  return out;
}

Molecule molecule_at(const std::vector<Vec3> &pts, int z = 6) {
  Molecule m;
  m.coords = pts;
  m.atomic_numbers.assign(pts.size(), z);
  return m;
}

} // namespace

TEST(NeighborSearch, TwoAtoms) {
  std::vector<Vec3> pts{{0, 0, 0}, {3, 0, 0}};
  EXPECT_EQ(neighbor_search(pts, 5.0), (EdgeList{{0, 1}, {1, 0}}));
}

TEST(NeighborSearch, BoundaryIsExcluded) {
  std::vector<Vec3> pts{{0, 0, 0}, {5, 0, 0}};
  EXPECT_TRUE(neighbor_search(pts, 5.0).empty());
  EXPECT_TRUE(neighbor_search_cells(pts, 5.0).empty());
}

TEST(NeighborSearch, RejectsBadInput) {
  std::vector<Vec3> pts{{0, 0, 0}, {std::numeric_limits<double>::quiet_NaN(), 0, 0}};
  EXPECT_THROW(neighbor_search(pts, 5.0), std::invalid_argument);
  std::vector<Vec3> ok{{0, 0, 0}};
  EXPECT_THROW(neighbor_search(ok, 0.0), std::invalid_argument);
  std::vector<Vec3> inf{{0, 0, 0}, {std::numeric_limits<double>::infinity(), 0, 0}};
  EXPECT_THROW(neighbor_search_cells(inf, 2.0), std::invalid_argument);
}

TEST(NeighborSearch, SixtyFourPointsMatchBruteForce) {
  std::mt19937_64 rng(64);
  auto pts = support::random_points(64, 10.0, rng);
  auto ref = all_pairs_reference(pts, 4.0);
  EXPECT_EQ(neighbor_search(pts, 4.0), ref);
  EXPECT_EQ(neighbor_search_cells(pts, 4.0), ref);
}

TEST(NeighborSearch, BothStrategiesMatchBruteForce) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 256;
    const double box = std::uniform_real_distribution<double>(1.0, 20.0)(rng);
    const double cutoff = std::uniform_real_distribution<double>(0.3, 6.0)(rng);
    auto pts = support::random_points(n, box, rng);
    auto ref = all_pairs_reference(pts, cutoff);
    EXPECT_EQ(neighbor_search_all_pairs(pts, cutoff), ref);
    EXPECT_EQ(neighbor_search_cells(pts, cutoff), ref);
  }
}

TEST(NeighborSearch, LargeInputUsesCellsAndStillMatches) {
  std::mt19937_64 rng(66);
  auto pts = support::random_points(kBruteForceLimit + 88, 18.0, rng);
  EXPECT_EQ(neighbor_search(pts, 3.0), all_pairs_reference(pts, 3.0));
}

TEST(DeriveBonds, Rules) {
  auto water = read_extxyz(support::fixture("water.xyz"));
  EXPECT_EQ(derive_bonds(water), *water.bonds);

  // 0.74 < 0.31 + 0.31 + 0.3
  auto h2 = read_extxyz(support::fixture("h2.xyz"));
  EXPECT_EQ(derive_bonds(h2), (std::vector<Bond>{{0, 1}}));

  auto he = molecule_at({{0, 0, 0}, {10, 0, 0}}, 2);
  EXPECT_TRUE(derive_bonds(he).empty());
}

TEST(DeriveBonds, CovalentHeuristicFindsExpectedBonds) {
  // methane: four C-H bonds and nothing else
  auto methane = read_extxyz(support::fixture("methane.xyz"));
  EXPECT_EQ(derive_bonds(methane).size(), 4u);
  auto ethane = read_extxyz(support::fixture("ethane.xyz"));
  EXPECT_EQ(derive_bonds(ethane).size(), 7u);
}

TEST(BuildMultiplex, WaterFixture) {
  auto water = read_extxyz(support::fixture("water.xyz"));
  MultiplexOptions opt;
  opt.local = LocalRule::bonds();
  opt.global_cutoff = 5.0;
  auto g = build_multiplex(water, opt);
  EXPECT_EQ(g.local_edges.size(), 4u);
  EXPECT_EQ(g.global_edges.size(), 6u);
  EXPECT_EQ(g.local_provenance, "bonds");
  EXPECT_NO_THROW(g.validate());

  opt.global_excludes_local = true;
  EXPECT_EQ(build_multiplex(water, opt).global_edges, (EdgeList{{1, 2}, {2, 1}}));
}

TEST(BuildMultiplex, CutoffRulesAndSingleAtom) {
  auto single = molecule_at({{0, 0, 0}});
  MultiplexOptions opt;
  opt.local = LocalRule::within(2.0);
  opt.global_cutoff = 6.0;
  auto g = build_multiplex(single, opt);
  EXPECT_TRUE(g.local_edges.empty());
  EXPECT_TRUE(g.global_edges.empty());

  auto chain = molecule_at({{0, 0, 0}, {1.5, 0, 0}, {3.0, 0, 0}, {7.0, 0, 0}});
  g = build_multiplex(chain, opt);
  EXPECT_EQ(g.local_edges.size(), 4u);  // 0-1, 1-2
  EXPECT_EQ(g.global_edges.size(), 10u); // all but 0-3

  opt.local = LocalRule::within(6.0);
  EXPECT_THROW(build_multiplex(chain, opt), std::invalid_argument);
  opt.local = LocalRule::within(2.0);
  opt.global_cutoff = 0.0;
  EXPECT_THROW(build_multiplex(chain, opt), std::invalid_argument);
}

TEST(BuildMultiplex, RandomGraphsAreSymmetricWithoutSelfEdges) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = support::random_molecule(2 + rng() % 40, 6.0, rng);
    MultiplexOptions opt;
    opt.local = trial % 2 ? LocalRule::bonds() : LocalRule::within(1.5);
    opt.global_cutoff = 4.0;
    auto g = build_multiplex(m, opt);
    for (const auto *layer : {&g.local_edges, &g.global_edges}) {
      std::set<Edge> s(layer->begin(), layer->end());
      for (const auto &e : *layer) {
        EXPECT_NE(e.src, e.dst);
        EXPECT_TRUE(s.count({e.dst, e.src}));
        EXPECT_LT(std::max(e.src, e.dst), g.n_nodes);
      }
    }
  }
}

TEST(Validate, DetectsBrokenGraphs) {
  MultiplexGraph g;
  g.n_nodes = 3;
  g.local_edges = {{0, 1}};
  EXPECT_THROW(g.validate(), std::logic_error);
  g.local_edges = {{1, 1}};
  EXPECT_THROW(g.validate(), std::logic_error);
  g.local_edges = {{0, 3}, {3, 0}};
  EXPECT_THROW(g.validate(), std::logic_error);
}

TEST(AngleTriples, Path) {
  // k=0 - j=1 - i=2
  auto t = enumerate_angle_triples(graph_from_bonds(3, {{0, 1}, {1, 2}}));
  EXPECT_EQ(as_set(t.two_hop), (std::set<Triple>{{0, 1, 2}, {2, 1, 0}}));
  // both one-hop angles sit at the middle atom
  EXPECT_EQ(as_set(t.one_hop), (std::set<Triple>{{0, 1, 2}, {2, 1, 0}}));
  EXPECT_EQ(t.two_hop.size(), 2u);
  EXPECT_EQ(t.one_hop.size(), 2u);
}

TEST(AngleTriples, SingleEdge) {
  auto t = enumerate_angle_triples(graph_from_bonds(2, {{0, 1}}));
  EXPECT_TRUE(t.two_hop.empty());
  EXPECT_TRUE(t.one_hop.empty());
}

TEST(AngleTriples, Star) {
  auto g = graph_from_bonds(4, {{0, 1}, {0, 2}, {0, 3}});
  auto t = enumerate_angle_triples(g);
  std::map<std::size_t, int> per_target;
  for (const auto &a : t.one_hop) {
    EXPECT_EQ(a.center, 0u);
    ++per_target[a.target_edge];
  }
  ASSERT_EQ(per_target.size(), 3u);
  for (const auto &[edge, n] : per_target) {
    EXPECT_EQ(g.local_edges[edge].dst, 0u);
    EXPECT_EQ(n, 2);
  }
  EXPECT_EQ(t.two_hop.size(), 6u);
}

TEST(AngleTriples, EdgeIndicesAndExclusions) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    auto g = graph_from_bonds(n, support::random_simple_graph(n, 0.4, rng));
    auto t = enumerate_angle_triples(g);
    std::vector<std::size_t> deg(n, 0);
    for (const auto &e : g.local_edges)
      ++deg[e.dst];

    // |two_hop| = sum over j->i of deg(j) - [i in N(j)]
    std::size_t expected = 0;
    for (const auto &e : g.local_edges)
      expected += deg[e.src] - 1;
    EXPECT_EQ(t.two_hop.size(), expected);
    EXPECT_EQ(t.one_hop.size(), expected);

    for (const auto &a : t.two_hop) {
      const auto &msg = g.local_edges[a.message_edge];
      const auto &tgt = g.local_edges[a.target_edge];
      EXPECT_NE(a.first, a.last);
      EXPECT_EQ(msg, (Edge{a.first, a.center}));
      EXPECT_EQ(tgt, (Edge{a.center, a.last}));
    }
    for (const auto &a : t.one_hop) {
      const auto &msg = g.local_edges[a.message_edge];
      const auto &tgt = g.local_edges[a.target_edge];
      EXPECT_NE(a.first, a.last);
      EXPECT_EQ(msg, (Edge{a.first, a.center}));
      EXPECT_EQ(tgt, (Edge{a.last, a.center}));
    }
    EXPECT_TRUE(std::is_sorted(t.two_hop.begin(), t.two_hop.end(),
                               [](const AngleTriple &x, const AngleTriple &y) {
                                 return x.target_edge < y.target_edge;
                               }));
  }
}

TEST(CountAngles, SmallGraphs) {
  std::vector<Bond> path{{0, 1}, {1, 2}};
  EXPECT_EQ(count_angles(3, path), 1u);
  std::vector<Bond> k4{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(count_angles(4, k4), 12u);
  EXPECT_EQ(enumerate_adjacent_pairs(k4), 12u);
  EXPECT_EQ(count_angles(4, edges_from_bonds(k4)), 12u);
}

TEST(CountAngles, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto edges = support::random_simple_graph(n, p, rng);
    EXPECT_EQ(count_angles(n, edges), enumerate_adjacent_pairs(edges));
  }
}

TEST(CountAngles, RandomGeometricGraph) {
  std::mt19937_64 rng(73);
  auto pts = support::random_points(40, 6.0, rng);
  auto directed = neighbor_search(pts, 2.0);
  std::vector<Bond> undirected;
  for (const auto &e : directed)
    if (e.src < e.dst)
      undirected.push_back({e.src, e.dst});
  EXPECT_EQ(count_angles(pts.size(), directed), enumerate_adjacent_pairs(undirected));
}

TEST(CountMessages, EmptyGraph) {
  MultiplexGraph g;
  g.n_nodes = 5;
  EXPECT_EQ(count_messages(g), (MessageCounts{0, 0, 0, 0, 10}));
}

TEST(CountMessages, MatchesTripleEnumeration) {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    auto g = graph_from_bonds(n, support::random_simple_graph(n, 0.5, rng),
                              support::random_simple_graph(n, 0.7, rng));
    auto t = enumerate_angle_triples(g);
    auto c = count_messages(g);
    EXPECT_EQ(c.global, 2 * g.global_edges.size());
    EXPECT_EQ(c.local_step1, t.two_hop.size() + g.local_edges.size());
    EXPECT_EQ(c.local_step2, t.one_hop.size() + g.local_edges.size());
    EXPECT_EQ(c.local_step3, g.local_edges.size());
    EXPECT_EQ(c.cross, 2 * n);
  }
}

TEST(GraphDump, Format) {
  auto g = graph_from_bonds(3, {{0, 1}}, {{0, 2}});
  std::ostringstream out;
  write_graph_dump(out, g);
  EXPECT_EQ(out.str(), "L 0 1\nL 1 0\nG 0 2\nG 2 0\n");
}
