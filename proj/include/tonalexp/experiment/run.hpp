#ifndef TONALEXP_EXPERIMENT_RUN_HPP
#define TONALEXP_EXPERIMENT_RUN_HPP

#include <vector>

#include "tonalexp/experiment/manifest.hpp"
#include "tonalexp/trainer/train.hpp"

namespace tonalexp::experiment {

/// What a single run-matrix entry needs beyond the ingested corpus. The
/// derived seeds (fold/shuffle/train) come from the master seed through a
/// fixed scheme and are recorded in the manifest.
struct TrainRunSpec {
  std::string dataset = "corpus";
  rnn::CellKind kind = rnn::CellKind::gru;
  bool shuffled = false;
  int fold_index = 0;
  int n_folds = 5;
  double train_fraction = 0.8;
  int subdivision = 2;
  Index hidden_size = 75;
  uint64_t master_seed = 1;

  dsp::CqtConfig cqt;
  dsp::ShepardConfig shepard;
  trainer::ObjectiveConfig objective;  // epsilon is recalibrated per run
  trainer::TrainConfig train;          // seed is derived from master_seed

  std::string run_id() const;
};

struct TrainRunOutcome {
  rnn::CellParams params;
  RunManifest manifest;
  trainer::TrainReport report;
};

/// Splits the corpus into folds, applies piece-wise shuffling to the
/// training pieces when requested, calibrates the objective's epsilon on
/// the (possibly shuffled) training transitions, trains with early
/// stopping, and assembles the manifest.
TrainRunOutcome run_training(const TrainRunSpec& spec,
                             const std::vector<corpus::Piece>& pieces);

/// Rebuilds the spec encoded in a manifest, for reproducing a run.
TrainRunSpec spec_from_manifest(const RunManifest& manifest);

} // namespace tonalexp::experiment

#endif
