#ifndef TONALEXP_EXPERIMENT_MANIFEST_HPP
#define TONALEXP_EXPERIMENT_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tonalexp/dsp/cqt.hpp"
#include "tonalexp/dsp/shepard.hpp"
#include "tonalexp/rnn/cell.hpp"
#include "tonalexp/trainer/objective.hpp"
#include "tonalexp/trainer/optimizer.hpp"

namespace tonalexp::experiment {

/// Everything needed to reproduce one training run, plus its results.
/// Every stochastic choice in the pipeline traces back to one of the
/// recorded seeds.
struct RunManifest {
  int format = 1;
  std::string dataset;
  rnn::CellKind kind = rnn::CellKind::gru;
  bool shuffled = false;  // ordering of the training spectrograms
  int fold_index = 0;
  int n_folds = 5;
  double train_fraction = 0.8;
  int subdivision = 2;
  Index hidden_size = 75;

  uint64_t master_seed = 0;
  uint64_t fold_seed = 0;
  uint64_t shuffle_seed = 0;
  uint64_t train_seed = 0;

  dsp::CqtConfig cqt;
  dsp::ShepardConfig shepard;
  trainer::ObjectiveConfig objective;  // epsilon holds the calibrated value
  trainer::TrainConfig train;

  double test_mce = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
  std::string stop_reason;
  std::optional<double> r_major;
  std::optional<double> r_minor;

  std::string created;
  std::string finished;
};

std::string ordering_label(bool shuffled);  // "shuf" or "orig"

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

} // namespace tonalexp::experiment

#endif
