#ifndef TONALEXP_EXPERIMENT_CHECKPOINT_HPP
#define TONALEXP_EXPERIMENT_CHECKPOINT_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "tonalexp/rnn/cell.hpp"
#include "tonalexp/trainer/optimizer.hpp"

namespace tonalexp::experiment {

/// Versioned model container: a plain-text header (version, kind, dims,
/// tensor directory) followed by raw little-endian doubles. Round-trips are
/// bit-exact.
struct Checkpoint {
  int version = 1;
  rnn::CellParams params;
  std::optional<trainer::OptimizerState> optimizer;
  std::string manifest_ref;  // path of the run manifest, or empty
};

void save_checkpoint(const std::filesystem::path& path,
                     const rnn::CellParams& params,
                     const trainer::OptimizerState* optimizer = nullptr,
                     const std::string& manifest_ref = {});

Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace tonalexp::experiment

#endif
