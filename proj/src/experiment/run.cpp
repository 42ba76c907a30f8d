#include "tonalexp/experiment/run.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <stdexcept>

namespace tonalexp::experiment {

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

constexpr uint64_t kFoldSalt = 0x666f6c64;     // "fold"
constexpr uint64_t kShuffleSalt = 0x73687566;  // "shuf"
constexpr uint64_t kTrainSalt = 0x7472616e;    // "tran"

} // namespace

std::string TrainRunSpec::run_id() const {
  return dataset + "_" + rnn::to_string(kind) + "_" + ordering_label(shuffled) +
         "_f" + std::to_string(fold_index) + "_s" + std::to_string(master_seed);
}

TrainRunSpec spec_from_manifest(const RunManifest& m) {
  TrainRunSpec spec;
  spec.dataset = m.dataset;
  spec.kind = m.kind;
  spec.shuffled = m.shuffled;
  spec.fold_index = m.fold_index;
  spec.n_folds = m.n_folds;
  spec.train_fraction = m.train_fraction;
  spec.subdivision = m.subdivision;
  spec.hidden_size = m.hidden_size;
  spec.master_seed = m.master_seed;
  spec.cqt = m.cqt;
  spec.shepard = m.shepard;
  spec.objective = m.objective;
  spec.train = m.train;
  return spec;
}

TrainRunOutcome run_training(const TrainRunSpec& spec,
                             const std::vector<corpus::Piece>& pieces) {
  if (spec.fold_index < 0 || spec.fold_index >= spec.n_folds)
    throw std::invalid_argument("fold index out of range");

  RunManifest manifest;
  manifest.dataset = spec.dataset;
  manifest.kind = spec.kind;
  manifest.shuffled = spec.shuffled;
  manifest.fold_index = spec.fold_index;
  manifest.n_folds = spec.n_folds;
  manifest.train_fraction = spec.train_fraction;
  manifest.subdivision = spec.subdivision;
  manifest.hidden_size = spec.hidden_size;
  manifest.master_seed = spec.master_seed;
  manifest.fold_seed = spec.master_seed ^ kFoldSalt;
  manifest.shuffle_seed = spec.master_seed ^ kShuffleSalt;
  manifest.train_seed = spec.master_seed ^ kTrainSalt;
  manifest.cqt = spec.cqt;
  manifest.shepard = spec.shepard;
  manifest.created = utc_timestamp();

  std::vector<std::string> ids;
  ids.reserve(pieces.size());
  for (const corpus::Piece& piece : pieces) ids.push_back(piece.piece_id);

  const auto folds = corpus::make_folds(ids, spec.n_folds, spec.train_fraction,
                                        manifest.fold_seed);
  const corpus::FoldSplit& fold = folds[static_cast<size_t>(spec.fold_index)];

  auto piece_by_id = [&](const std::string& id) -> const corpus::Piece& {
    for (const corpus::Piece& piece : pieces)
      if (piece.piece_id == id) return piece;
    throw std::out_of_range("fold references unknown piece " + id);
  };

  std::vector<corpus::Piece> train_pieces;
  for (size_t i = 0; i < fold.train_ids.size(); ++i) {
    const corpus::Piece& src = piece_by_id(fold.train_ids[i]);
    if (spec.shuffled)
      train_pieces.push_back(
          corpus::piecewise_shuffle(src, manifest.shuffle_seed + i));
    else
      train_pieces.push_back(src);
  }
  std::vector<corpus::Piece> test_pieces;
  for (const std::string& id : fold.test_ids)
    test_pieces.push_back(piece_by_id(id));

  trainer::ObjectiveConfig objective = spec.objective;
  objective.epsilon = trainer::calibrate_epsilon(
      trainer::collect_transition_changes(train_pieces), objective.quantile);
  manifest.objective = objective;

  trainer::TrainConfig train = spec.train;
  train.seed = manifest.train_seed;
  manifest.train = train;

  trainer::TrainResult result = trainer::train_model(
      spec.kind, spec.hidden_size, train_pieces, test_pieces, objective, train);

  manifest.test_mce = result.report.best_test_mce;
  manifest.best_epoch = result.report.best_epoch;
  manifest.epochs_run = static_cast<int>(result.report.epochs.size());
  manifest.stop_reason = result.report.stop_reason;
  manifest.finished = utc_timestamp();

  return TrainRunOutcome{std::move(result.best_params), std::move(manifest),
                         std::move(result.report)};
}

} // namespace tonalexp::experiment
