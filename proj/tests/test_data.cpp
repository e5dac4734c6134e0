#include "mxm/dataset.hpp"
#include "mxm/elements.hpp"
#include "mxm/molecule.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

using namespace mxm;
namespace fs = std::filesystem;

namespace {

Molecule parse(const std::string &text) {
  std::istringstream in(text);
  return parse_extxyz(in, "inline");
}

std::size_t parse_error_line(const std::string &text) {
  try {
    parse(text);
  } catch (const ParseError &e) {
    return e.line();
  }
  return 0;
}

Dataset synthetic_dataset(std::size_t n) {
  Dataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    Molecule m;
    m.name = "m" + std::to_string(i);
    m.atomic_numbers = {1};
    m.coords = {Vec3{0, 0, 0}};
    m.targets["U0"] = static_cast<double>(i);
    ds.add(m, "mol_" + std::to_string(i) + ".xyz");
  }
  return ds;
}

} // namespace

TEST(Elements, SymbolsAndRadii) {
  EXPECT_EQ(atomic_number("H"), 1);
  EXPECT_EQ(atomic_number("cl"), 17);
  EXPECT_EQ(atomic_number("Xe"), 54);
  EXPECT_FALSE(atomic_number("Cs").has_value());
  EXPECT_FALSE(atomic_number("Qq").has_value());
  EXPECT_EQ(element_symbol(8), "O");
  EXPECT_DOUBLE_EQ(covalent_radius(1), 0.31);
  EXPECT_THROW(covalent_radius(55), std::out_of_range);
}

TEST(ParseExtxyz, SingleAtom) {
  auto m = parse("1\nU0=-13.6\nH 0 0 0");
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.atomic_numbers, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(m.target("U0"), -13.6);
  EXPECT_FALSE(m.bonds.has_value());
}

TEST(ParseExtxyz, WaterFixtureWithBonds) {
  auto m = read_extxyz(support::fixture("water.xyz"));
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.atomic_numbers, (std::vector<int>{8, 1, 1}));
  ASSERT_TRUE(m.bonds.has_value());
  EXPECT_EQ(*m.bonds, (std::vector<Bond>{{0, 1}, {0, 2}}));
  EXPECT_EQ(m.name, "water");
}

TEST(ParseExtxyz, CrlfAndExtraColumns) {
  auto m = parse("2\r\nU0=1.5 comment=yes\r\nH 0 0 0 0.1\r\nO 1 0 0 -0.1\r\n");
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.targets.size(), 1u);
  EXPECT_DOUBLE_EQ(m.coords[1][0], 1.0);
}

TEST(ParseExtxyz, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("3\nU0=1\nH 0 0 0\nH 1 0 0\n"), 5u);
  EXPECT_EQ(parse_error_line("2\nU0=1\nH 0 0 0\nZz 1 0 0\n"), 4u);
  EXPECT_EQ(parse_error_line("2\nU0=1\nH 0 0 0\nH 1 x 0\n"), 4u);
  EXPECT_EQ(parse_error_line("two\n"), 1u);
  EXPECT_EQ(parse_error_line("2\nU0=1\nH 0 0 0\nH 1 0 0\nBONDS\n0 0\n"), 6u);
  EXPECT_EQ(parse_error_line("2\nU0=1\nH 0 0 0\nH 1 0 0\nBONDS\n0 2\n"), 6u);
}

TEST(ParseExtxyz, FileErrorsNameTheFile) {
  const auto dir = fs::temp_directory_path() / "mxm_parse_test";
  fs::create_directories(dir);
  const auto path = dir / "short.xyz";
  std::ofstream(path) << "3\nU0=0\nH 0 0 0\n";
  try {
    read_extxyz(path);
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("short.xyz"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(ParseExtxyz, RoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = support::random_molecule(1 + rng() % 9, 4.0, rng);
    m.name = "";
    m.targets["U0"] = std::uniform_real_distribution<double>(-1e3, 1e3)(rng);
    m.targets["gap"] = 1.0 / 3.0;
    if (trial % 2 == 0 && m.size() > 1)
      m.bonds = std::vector<Bond>{make_bond(0, m.size() - 1)};
    std::stringstream buf;
    write_extxyz(buf, m);
    auto back = parse_extxyz(buf);
    EXPECT_EQ(back, m);
  }
}

TEST(Molecule, ValidateRejectsBrokenInvariants) {
  Molecule m;
  m.atomic_numbers = {1, 1};
  m.coords = {Vec3{0, 0, 0}};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.coords.push_back(Vec3{1, 0, 0});
  m.bonds = std::vector<Bond>{{0, 1}, {0, 1}};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.bonds = std::vector<Bond>{{1, 1}};
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.bonds = std::vector<Bond>{{0, 1}};
  EXPECT_NO_THROW(m.validate());
}

TEST(Manifest, LoadsFixturesAndRejectsEmpty) {
  auto ds = load_manifest(support::fixture("manifest.txt"));
  EXPECT_EQ(ds.size(), 12u);
  EXPECT_EQ(ds.keys.size(), ds.size());

  const auto dir = fs::temp_directory_path() / "mxm_manifest_test";
  fs::create_directories(dir);
  std::ofstream(dir / "empty.txt") << "# nothing here\n\n";
  EXPECT_THROW(load_manifest(dir / "empty.txt"), std::runtime_error);
  EXPECT_THROW(load_manifest(dir / "missing.txt"), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Split, SizesAndDeterminism) {
  auto a = split_dataset(synthetic_dataset(10), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(a.split.train.size(), 8u);
  EXPECT_EQ(a.split.validation.size(), 1u);
  EXPECT_EQ(a.split.test.size(), 1u);
  auto b = split_dataset(synthetic_dataset(10), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(a.split, b.split);

  std::set<std::size_t> all(a.split.train.begin(), a.split.train.end());
  all.insert(a.split.validation.begin(), a.split.validation.end());
  all.insert(a.split.test.begin(), a.split.test.end());
  EXPECT_EQ(all.size(), 10u);
}

TEST(Split, SeedsGiveDifferentPermutations) {
  auto a = split_dataset(synthetic_dataset(100), {0.8, 0.1, 0.1}, 1);
  auto b = split_dataset(synthetic_dataset(100), {0.8, 0.1, 0.1}, 2);
  EXPECT_NE(a.split.train, b.split.train);
}

TEST(Split, MembershipIgnoresInputOrder) {
  auto ds = synthetic_dataset(60);
  Dataset reversed;
  for (std::size_t i = ds.size(); i-- > 0;)
    reversed.add(ds.molecules[i], ds.keys[i]);
  auto a = split_dataset(ds, {0.7, 0.2, 0.1}, 3);
  auto b = split_dataset(reversed, {0.7, 0.2, 0.1}, 3);

  auto keys_of = [](const Dataset &d, const std::vector<std::size_t> &idx) {
    std::set<std::string> out;
    for (auto i : idx)
      out.insert(d.keys[i]);
    return out;
  };
  EXPECT_EQ(keys_of(a, a.split.train), keys_of(b, b.split.train));
  EXPECT_EQ(keys_of(a, a.split.validation), keys_of(b, b.split.validation));
  EXPECT_EQ(keys_of(a, a.split.test), keys_of(b, b.split.test));
}

TEST(Split, RejectsBadInput) {
  EXPECT_THROW(split_dataset(Dataset{}, {0.8, 0.1, 0.1}, 0), std::invalid_argument);
  EXPECT_THROW(split_dataset(synthetic_dataset(4), {0.8, 0.2, 0.1}, 0),
               std::invalid_argument);
  EXPECT_THROW(split_dataset(synthetic_dataset(4), {0.8, 0.0, 0.1}, 0),
               std::invalid_argument);
}

TEST(AtomRefs, Subtraction) {
  auto h2 = read_extxyz(support::fixture("h2.xyz"));
  EXPECT_DOUBLE_EQ(subtract_atomrefs(h2, "U0", {{1, 0.0}}), -1.17);
  EXPECT_NEAR(subtract_atomrefs(h2, "U0", {{1, -0.5}}), -0.17, 1e-15);

  auto water = read_extxyz(support::fixture("water.xyz"));
  std::istringstream table("H -13.6131\nO -2042.6112\nC -1029.8631\n");
  const auto refs = parse_atomrefs(table);
  const double by_hand = water.target("U0") - (-2042.6112 - 2 * 13.6131);
  EXPECT_NEAR(subtract_atomrefs(water, "U0", refs), by_hand, 1e-9);

  try {
    subtract_atomrefs(water, "U0", {{1, 0.0}});
    FAIL();
  } catch (const std::out_of_range &e) {
    EXPECT_NE(std::string(e.what()).find("O"), std::string::npos);
  }
}

TEST(AtomRefs, BundledTableCoversFixtures) {
  auto refs = read_atomrefs(support::data_dir() / "atomrefs.txt");
  auto ds = load_manifest(support::fixture("manifest.txt"));
  for (const auto &m : ds.molecules)
    EXPECT_NO_THROW(subtract_atomrefs(m, "U0", refs)) << m.name;
}

TEST(TargetStats, SmallCases) {
  EXPECT_THROW(compute_stats({1, 1, 1}), DegenerateTarget);
  auto s = compute_stats({0, 2});
  EXPECT_DOUBLE_EQ(s.mean, 1.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
}

TEST(TargetStats, MatchesTwoPassOnTrainSplit) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(-40.0, 7.0);
  auto ds = synthetic_dataset(50);
  for (auto &m : ds.molecules)
    m.targets["U0"] = n(rng);
  ds = split_dataset(ds, {0.6, 0.2, 0.2}, 5);
  auto stats = target_stats(ds, "U0");

  std::vector<double> v;
  for (auto i : ds.split.train)
    v.push_back(ds.molecules[i].target("U0"));
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= v.size();
  double var = 0.0;
  for (double x : v)
    var += (x - mean) * (x - mean);
  var /= v.size();
  EXPECT_NEAR(stats.mean, mean, 1e-12);
  EXPECT_NEAR(stats.std, std::sqrt(var), 1e-12);
}
