#pragma once

#include "mxm/model.hpp"

#include <filesystem>
#include <iosfwd>

namespace mxm {

/// Binary checkpoint.
///
///   MXMNET-CHECKPOINT 1 hidden=F layers=L residuals=R order=O params=K\n
///   then K records, each
///   <name> <rank> <d0> ... <dr-1>\n<numel 64-bit little-endian doubles>\n
///
/// Loading a saved file and saving it again reproduces it byte for byte.
void save_checkpoint(std::ostream &out, const ModelConfig &cfg, const ParamStore &params);
void save_checkpoint(const std::filesystem::path &path, const ModelConfig &cfg,
                     const ParamStore &params);

struct Checkpoint {
  ModelConfig config;
  ParamStore params;
};

/// Throws std::runtime_error on a bad header, truncated data or a malformed
/// record.
Checkpoint load_checkpoint(std::istream &in);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace mxm
