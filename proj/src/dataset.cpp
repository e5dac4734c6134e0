#include "mxm/dataset.hpp"

#include "mxm/elements.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mxm {

namespace {

std::uint64_t fnv1a(const std::string &s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

} // namespace

void Dataset::add(Molecule m, std::string key) {
  m.validate();
  molecules.push_back(std::move(m));
  keys.push_back(std::move(key));
}

Dataset load_manifest(const std::filesystem::path &manifest) {
  std::ifstream in(manifest);
  if (!in)
    throw std::runtime_error("cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    std::filesystem::path p(line);
    if (p.is_relative())
      p = base / p;
    ds.add(read_extxyz(p), line);
  }
  if (ds.size() == 0)
    throw std::runtime_error("manifest " + manifest.string() +
                             " lists no molecules");
  return ds;
}

Dataset split_dataset(Dataset ds, const std::array<double, 3> &fractions,
                      std::uint64_t seed) {
  if (ds.size() == 0)
    throw std::invalid_argument("split_dataset: empty dataset");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0))
      throw std::invalid_argument("split_dataset: fractions must be positive");
    total += f;
  }
  if (total > 1.0 + 1e-12)
    throw std::invalid_argument("split_dataset: fractions sum to more than 1");

  const std::uint64_t salt = splitmix64(seed);
  std::vector<std::pair<std::uint64_t, std::size_t>> order;
  order.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    order.emplace_back(splitmix64(fnv1a(ds.keys[i]) ^ salt), i);
  std::sort(order.begin(), order.end(), [&](const auto &a, const auto &b) {
    if (a.first != b.first)
      return a.first < b.first;
    return ds.keys[a.second] < ds.keys[b.second];
  });

  const auto n = static_cast<double>(ds.size());
  std::array<std::size_t, 3> counts{};
  for (int k = 0; k < 3; ++k)
    counts[k] = static_cast<std::size_t>(std::floor(fractions[k] * n + 1e-9));

  Split split;
  std::size_t pos = 0;
  std::vector<std::size_t> *targets[3] = {&split.train, &split.validation,
                                          &split.test};
  for (int k = 0; k < 3; ++k)
    for (std::size_t c = 0; c < counts[k]; ++c)
      targets[k]->push_back(order[pos++].second);

  ds.split = std::move(split);
  ds.split_seed = seed;
  return ds;
}

AtomRefs parse_atomrefs(std::istream &in) {
  AtomRefs refs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    std::istringstream is(line);
    std::string symbol;
    double value = 0.0;
    std::string extra;
    if (!(is >> symbol >> value) || (is >> extra))
      throw ParseError(lineno, "expected 'symbol value', got '" + line + "'");
    auto z = atomic_number(symbol);
    if (!z)
      throw ParseError(lineno, "unknown element symbol '" + symbol + "'");
    refs[*z] = value;
  }
  return refs;
}

AtomRefs read_atomrefs(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open atom reference table " + path.string());
  return parse_atomrefs(in);
}

double subtract_atomrefs(const Molecule &m, const std::string &prop,
                         const AtomRefs &refs) {
  double value = m.target(prop);
  for (int z : m.atomic_numbers) {
    auto it = refs.find(z);
    if (it == refs.end())
      throw std::out_of_range("no atomic reference for element " +
                              element_symbol(z) + " in molecule '" + m.name + "'");
    value -= it->second;
  }
  return value;
}

DegenerateTarget::DegenerateTarget(const std::string &prop, double mean)
    : std::runtime_error("target '" + prop +
                         "' has zero standard deviation over the training split"),
      mean_(mean) {}

TargetStats compute_stats(const std::vector<double> &values,
                          const std::string &prop) {
  if (values.empty())
    throw std::invalid_argument("target statistics of an empty set");
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n);
  if (var <= 0.0)
    throw DegenerateTarget(prop, mean);
  return {mean, std::sqrt(var)};
}

TargetStats target_stats(const Dataset &ds, const std::string &prop) {
  if (ds.split.train.empty())
    throw std::invalid_argument("target_stats: training split is empty");
  std::vector<double> values;
  values.reserve(ds.split.train.size());
  for (auto i : ds.split.train)
    values.push_back(ds.molecules.at(i).target(prop));
  return compute_stats(values, prop);
}

} // namespace mxm
