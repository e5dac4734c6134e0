#include "mxm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

namespace mxm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string &key, const std::string &v) {
  double out = 0.0;
  std::size_t used = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string &key, const std::string &v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string &key, const std::string &v, F convert) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<T>(convert(key, trim(item))));
  if (out.empty())
    throw ConfigError("'" + key + "' expects a comma-separated list");
  return out;
}

std::filesystem::path to_path(const std::string &v, const std::filesystem::path &base) {
  std::filesystem::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

using Setter = std::function<void(RunConfig &, const std::string &, const std::string &,
                                  const std::filesystem::path &)>;

const std::vector<std::pair<std::string, Setter>> &setters() {
  using P = std::filesystem::path;
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"manifest", [](RunConfig &c, auto &, auto &v, const P &b) { c.manifest = to_path(v, b); }},
      {"target", [](RunConfig &c, auto &, auto &v, auto &) { c.target = v; }},
      {"atomrefs", [](RunConfig &c, auto &, auto &v, const P &b) { c.atomrefs = to_path(v, b); }},
      {"split_train", [](RunConfig &c, auto &k, auto &v, auto &) { c.split[0] = to_double(k, v); }},
      {"split_validation",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.split[1] = to_double(k, v); }},
      {"split_test", [](RunConfig &c, auto &k, auto &v, auto &) { c.split[2] = to_double(k, v); }},
      {"local_rule",
       [](RunConfig &c, auto &k, auto &v, auto &) {
         if (v == "bonds")
           c.local_bonds = true;
         else if (v == "cutoff")
           c.local_bonds = false;
         else
           throw ConfigError("'" + k + "' must be bonds or cutoff, got '" + v + "'");
       }},
      {"dl", [](RunConfig &c, auto &k, auto &v, auto &) { c.dl = to_double(k, v); }},
      {"dg", [](RunConfig &c, auto &k, auto &v, auto &) { c.dg = to_double(k, v); }},
      {"local_basis_cutoff",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.local_basis_cutoff = to_double(k, v); }},
      {"global_excludes_local",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.global_excludes_local = to_bool(k, v); }},
      {"hidden", [](RunConfig &c, auto &k, auto &v, auto &) { c.model.hidden = to_uint(k, v); }},
      {"layers", [](RunConfig &c, auto &k, auto &v, auto &) { c.model.layers = to_uint(k, v); }},
      {"residuals",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.model.residuals = to_uint(k, v); }},
      {"order",
       [](RunConfig &c, auto &, auto &v, auto &) {
         try {
           c.model.order = parse_block_order(v);
         } catch (const std::invalid_argument &e) {
           throw ConfigError(e.what());
         }
       }},
      {"group", [](RunConfig &c, auto &k, auto &v, auto &) { c.group = to_uint(k, v); }},
      {"lr", [](RunConfig &c, auto &k, auto &v, auto &) { c.lr = to_double(k, v); }},
      {"epochs", [](RunConfig &c, auto &k, auto &v, auto &) { c.epochs = to_uint(k, v); }},
      {"patience", [](RunConfig &c, auto &k, auto &v, auto &) { c.patience = to_uint(k, v); }},
      {"seed", [](RunConfig &c, auto &k, auto &v, auto &) { c.seed = to_uint(k, v); }},
      {"loss",
       [](RunConfig &c, auto &k, auto &v, auto &) {
         if (v == "mae")
           c.loss = LossKind::Mae;
         else if (v == "mse")
           c.loss = LossKind::Mse;
         else
           throw ConfigError("'" + k + "' must be mae or mse, got '" + v + "'");
       }},
      {"warmup_epochs",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.warmup_epochs = to_double(k, v); }},
      {"decay_epochs",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.decay_epochs = to_double(k, v); }},
      {"ema_decay", [](RunConfig &c, auto &k, auto &v, auto &) { c.ema_decay = to_double(k, v); }},
      {"verify_pairs",
       [](RunConfig &c, auto &, auto &v, const P &b) { c.verify_pairs = to_path(v, b); }},
      {"verify_rigid_trials",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.verify_rigid_trials = to_uint(k, v); }},
      {"verify_permutation_trials",
       [](RunConfig &c, auto &k, auto &v, auto &) {
         c.verify_permutation_trials = to_uint(k, v);
       }},
      {"bench_nodes",
       [](RunConfig &c, auto &k, auto &v, auto &) {
         c.bench_nodes = to_list<std::size_t>(k, v, to_uint);
       }},
      {"bench_degrees",
       [](RunConfig &c, auto &k, auto &v, auto &) {
         c.bench_degrees = to_list<double>(k, v, to_double);
       }},
      {"bench_repeats",
       [](RunConfig &c, auto &k, auto &v, auto &) { c.bench_repeats = to_uint(k, v); }},
      {"out", [](RunConfig &c, auto &, auto &v, auto &) { c.out = v; }},
  };
  return table;
}

} // namespace

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto &[name, fn] : setters())
      k.push_back(name);
    return k;
  }();
  return keys;
}

void RunConfig::set(const std::string &key, const std::string &value,
                    const std::filesystem::path &base) {
  for (const auto &[name, fn] : setters())
    if (name == key) {
      fn(*this, key, value, base);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string &msg) { throw ConfigError(msg); };
  if (target.empty())
    fail("target name is empty");
  for (double f : split)
    if (!(f > 0.0))
      fail("split fractions must be positive");
  if (split[0] + split[1] + split[2] > 1.0 + 1e-12)
    fail("split fractions sum to more than 1");
  if (!(dg > 0.0))
    fail("dg must be positive");
  if (!(dl > 0.0))
    fail("dl must be positive");
  if (!local_bonds && !(dl < dg))
    fail("the local cutoff dl must be below the global cutoff dg");
  if (!(local_basis_cutoff > 0.0))
    fail("local_basis_cutoff must be positive");
  try {
    model.validate();
  } catch (const std::invalid_argument &e) {
    fail(e.what());
  }
  if (group == 0)
    fail("group must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr))
    fail("lr must be positive");
  if (!(warmup_epochs >= 0.0) || !(decay_epochs > 0.0))
    fail("warmup_epochs must be >= 0 and decay_epochs > 0");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0))
    fail("ema_decay must lie in [0, 1)");
  if (bench_nodes.empty() || bench_degrees.empty() || bench_repeats == 0)
    fail("bench grid is empty");
  for (double k : bench_degrees)
    if (!(k > 0.0))
      fail("bench_degrees must be positive");
  for (auto n : bench_nodes)
    if (n == 0)
      fail("bench_nodes must be positive");
  if (out.empty())
    fail("output directory is empty");
}

FeatureOptions RunConfig::features() const {
  FeatureOptions f;
  f.graph.local = local_bonds ? LocalRule::bonds() : LocalRule::within(dl);
  f.graph.global_cutoff = dg;
  f.graph.global_excludes_local = global_excludes_local;
  f.local_basis_cutoff = local_basis_cutoff;
  return f;
}

TrainConfig RunConfig::training() const {
  TrainConfig t;
  t.epochs = epochs;
  t.patience = patience;
  t.group = group;
  t.base_lr = lr;
  t.loss = loss;
  t.seed = seed;
  t.schedule.warmup_epochs = warmup_epochs;
  t.schedule.decay_epochs = decay_epochs;
  t.ema_decay = ema_decay;
  return t;
}

RunConfig parse_config(std::istream &in, const std::filesystem::path &base) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    try {
      cfg.set(key, value, base);
    } catch (const ConfigError &e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig read_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  try {
    return parse_config(in, path.parent_path());
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace mxm
