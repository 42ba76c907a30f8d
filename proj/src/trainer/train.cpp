#include "tonalexp/trainer/train.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace tonalexp::trainer {

std::vector<double> collect_transition_changes(
    std::span<const corpus::Piece> pieces) {
  std::vector<double> changes;
  for (const corpus::Piece& piece : pieces) {
    const auto& frames = piece.spectrogram.frames;
    for (size_t t = 0; t + 1 < frames.size(); ++t)
      changes.push_back(frame_change(frames[t].values, frames[t + 1].values));
  }
  return changes;
}

double evaluate_mce(const rnn::CellParams& params,
                    std::span<const corpus::Piece> test_pieces,
                    const ObjectiveConfig& cfg) {
  if (test_pieces.empty()) throw std::invalid_argument("empty test set");

  double total = 0.0;
  long transitions = 0;
  for (const corpus::Piece& piece : test_pieces) {
    const auto& frames = piece.spectrogram.frames;
    if (frames.size() < 2) continue;
    rnn::RnnState state = rnn::RnnState::zeros(params, 1);
    for (size_t t = 0; t + 1 < frames.size(); ++t) {
      const Vector y = rnn::step(params, state, frames[t].values);
      total += cross_entropy(y, frames[t + 1].values, cfg.output_clamp);
      ++transitions;
    }
  }
  if (transitions == 0)
    throw std::invalid_argument("test set has no transitions to predict");
  return total / static_cast<double>(transitions);
}

TrainResult train_model(rnn::CellKind kind, Index hidden_size,
                        std::span<const corpus::Piece> train_pieces,
                        std::span<const corpus::Piece> test_pieces,
                        const ObjectiveConfig& objective,
                        const TrainConfig& cfg) {
  objective.validate();
  cfg.validate();
  if (train_pieces.empty() || test_pieces.empty())
    throw std::invalid_argument("train and test sets must be nonempty");

  const Index bins = train_pieces.front().spectrogram.frames.front().values.size();
  rnn::CellParams params = rnn::init_params(kind, bins, hidden_size, cfg.seed);
  OptimizerState opt = OptimizerState::zeros_like(params);
  std::mt19937_64 rng(cfg.seed + 1);

  const int batches = corpus::epoch_batches(train_pieces, cfg.batch_size, cfg.seq_len);

  TrainResult result;
  result.best_params = params;
  result.report.best_test_mce = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    EpochStats stats;
    for (int b = 0; b < batches; ++b) {
      corpus::Batch batch =
          corpus::sample_batch(train_pieces, cfg.batch_size, cfg.seq_len, rng);
      BpttResult bptt = bptt_gradients(params, batch, objective, cfg.truncation);
      clip_gradients(bptt.gradients, cfg.clip);
      rmsprop_step(params, bptt.gradients, opt, cfg);
      stats.train_weighted_ce += bptt.loss.weighted_ce;
      stats.train_unweighted_ce += bptt.loss.unweighted_ce;
    }
    stats.train_weighted_ce /= batches;
    stats.train_unweighted_ce /= batches;
    stats.test_mce = evaluate_mce(params, test_pieces, objective);
    result.report.epochs.push_back(stats);

    if (stats.test_mce < result.report.best_test_mce) {
      result.report.best_test_mce = stats.test_mce;
      result.report.best_epoch = epoch;
      result.best_params = params;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= cfg.patience) {
      result.report.stop_reason = "early_stop";
      return result;
    }
  }
  result.report.stop_reason = "max_epochs";
  return result;
}

} // namespace tonalexp::trainer
