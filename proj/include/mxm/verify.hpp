#pragma once

#include "mxm/config.hpp"
#include "mxm/molecule.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mxm {

/// Outcome of one property check: the worst value observed and the bound it
/// was held to.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Two structures declared to differ only by a rigid motion.
using EquivalentPair = std::pair<Molecule, Molecule>;

/// Reads "a.xyz b.xyz" lines; paths are relative to the list file.
std::vector<EquivalentPair> read_equivalent_pairs(const std::filesystem::path &path);

/// Individual suites; `molecules` are the configured dataset.
CheckResult check_gradients(const std::vector<Molecule> &molecules, const RunConfig &cfg);
CheckResult check_rigid_invariance(const std::vector<Molecule> &molecules,
                                   const RunConfig &cfg);
CheckResult check_permutation_invariance(const std::vector<Molecule> &molecules,
                                         const RunConfig &cfg);
CheckResult check_angle_count(const RunConfig &cfg);
CheckResult check_message_counts(const std::vector<Molecule> &molecules, const RunConfig &cfg);
CheckResult check_basis();
CheckResult check_checkpoint(const std::vector<Molecule> &molecules, const RunConfig &cfg);
CheckResult check_equivalent_pairs(const std::vector<EquivalentPair> &pairs,
                                   const RunConfig &cfg);

std::vector<CheckResult> run_verify(const std::vector<Molecule> &molecules,
                                    const std::vector<EquivalentPair> &pairs,
                                    const RunConfig &cfg);

/// "PASS name measured=... tol=... detail" per check.
void write_verify_report(std::ostream &out, const std::vector<CheckResult> &results);

} // namespace mxm
