#pragma once

#include "mxm/molecule.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxm {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  friend bool operator==(const Split &, const Split &) = default;
};

/// Molecules plus their identity keys (the path listed in the manifest) and
/// the current split. Immutable once loaded and split.
struct Dataset {
  std::vector<Molecule> molecules;
  std::vector<std::string> keys;
  Split split;
  std::uint64_t split_seed = 0;

  std::size_t size() const { return molecules.size(); }
  void add(Molecule m, std::string key);
};

/// Reads a manifest: one molecule path per line, relative paths resolved
/// against the manifest's directory. Blank lines and '#' comments skipped.
Dataset load_manifest(const std::filesystem::path &manifest);

/// Orders molecules by a seeded hash of their identity key, then assigns
/// contiguous train/validation/test blocks of floor(fraction * n) molecules.
/// Membership therefore depends only on (seed, key), not on input order.
Dataset split_dataset(Dataset ds, const std::array<double, 3> &fractions,
                      std::uint64_t seed);

/// Element -> reference energy table.
using AtomRefs = std::map<int, double>;

/// Parses "symbol value" lines.
AtomRefs read_atomrefs(const std::filesystem::path &path);
AtomRefs parse_atomrefs(std::istream &in);

/// target(prop) minus the sum of per-atom reference values.
double subtract_atomrefs(const Molecule &m, const std::string &prop,
                         const AtomRefs &refs);

struct TargetStats {
  double mean = 0.0;
  double std = 0.0; // population standard deviation
};

/// Raised when a target has zero spread over the training split, which makes
/// standardized MAE undefined.
class DegenerateTarget : public std::runtime_error {
public:
  DegenerateTarget(const std::string &prop, double mean);
  double mean() const { return mean_; }

private:
  double mean_;
};

/// Mean and population std of `values`. Throws DegenerateTarget when std is 0.
TargetStats compute_stats(const std::vector<double> &values,
                          const std::string &prop = "target");

/// Statistics of prop over the training split only.
TargetStats target_stats(const Dataset &ds, const std::string &prop);

} // namespace mxm
