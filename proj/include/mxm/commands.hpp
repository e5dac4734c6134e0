#pragma once

#include "mxm/config.hpp"
#include "mxm/training.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mxm {

/// Writes per-molecule graph dumps and basis matrices into cfg.out and prints
/// one summary line per molecule:
///   N=<atoms> El=<directed local edges> Eg=<directed global edges>
///   T2=<two-hop triples> T1=<one-hop triples> name=<molecule>
void cmd_featurize(const RunConfig &cfg, std::ostream &out);

struct TrainOutcome {
  TrainReport report;
  double train_mae = 0.0; // checkpoint weights on the training split
  double val_mae = 0.0;   // checkpoint weights on the validation split
};

/// Trains on the configured split and writes report.csv, checkpoint.bin
/// (best-epoch EMA weights) and summary.json into cfg.out.
TrainOutcome cmd_train(const RunConfig &cfg, std::ostream &out);

/// Prints one JSON object per requested split:
///   {"split":..,"n":..,"mae":..,"std_mae":..,"pearson_r":..,"target":..}
/// `split` is train, validation, test or all.
void cmd_eval(const RunConfig &cfg, const std::filesystem::path &checkpoint,
              const std::string &split, std::ostream &out);

/// Runs the property suite and prints its report; returns true when every
/// check passed. The report is also written to cfg.out/verify.txt.
bool cmd_verify(const RunConfig &cfg, std::ostream &out);

/// Writes bench.csv and scaling.csv into cfg.out and prints the fitted slopes.
void cmd_bench(const RunConfig &cfg, std::ostream &out);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace mxm
