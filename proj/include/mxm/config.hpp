#pragma once

#include "mxm/features.hpp"
#include "mxm/model.hpp"
#include "mxm/training.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxm {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Settings shared by every command.
///
/// File format: one "key = value" per line, '#' starts a comment. Relative
/// paths in a file are resolved against the file's directory. Unknown keys
/// and malformed values are errors.
struct RunConfig {
  // data
  std::filesystem::path manifest;
  std::string target = "U0";
  std::optional<std::filesystem::path> atomrefs;
  std::array<double, 3> split{0.8, 0.1, 0.1};

  // graph and basis
  bool local_bonds = true; // local_rule = bonds | cutoff
  double dl = 2.0;         // local cutoff (Angstrom), used by the cutoff rule
  double dg = 5.0;         // global cutoff (Angstrom)
  double local_basis_cutoff = 5.0;
  bool global_excludes_local = false;

  // model
  ModelConfig model;

  // training
  std::size_t group = 32;
  double lr = 1e-3;
  std::size_t epochs = 100;
  std::size_t patience = 50;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::Mae;
  double warmup_epochs = 1.0;
  double decay_epochs = 600.0;
  double ema_decay = 0.999;

  // verify
  std::optional<std::filesystem::path> verify_pairs;
  std::size_t verify_rigid_trials = 100;
  std::size_t verify_permutation_trials = 50;

  // bench
  std::vector<std::size_t> bench_nodes{512};
  std::vector<double> bench_degrees{6, 12, 24, 48};
  std::size_t bench_repeats = 3;

  std::filesystem::path out = "mxm_out";

  /// Applies one key/value pair; `base` resolves relative paths.
  void set(const std::string &key, const std::string &value,
           const std::filesystem::path &base = {});

  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  FeatureOptions features() const;
  TrainConfig training() const;
};

RunConfig parse_config(std::istream &in, const std::filesystem::path &base = {});
RunConfig read_config(const std::filesystem::path &path);

/// Keys accepted by RunConfig::set, in documentation order.
const std::vector<std::string> &config_keys();

} // namespace mxm
