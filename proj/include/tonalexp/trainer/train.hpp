#ifndef TONALEXP_TRAINER_TRAIN_HPP
#define TONALEXP_TRAINER_TRAIN_HPP

#include <span>
#include <string>
#include <vector>

#include "tonalexp/corpus/corpus.hpp"
#include "tonalexp/trainer/optimizer.hpp"

namespace tonalexp::trainer {

struct EpochStats {
  double train_weighted_ce = 0.0;
  double train_unweighted_ce = 0.0;
  double test_mce = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // 0-based index into epochs
  double best_test_mce = 0.0;
  std::string stop_reason;  // "early_stop" or "max_epochs"
};

struct TrainResult {
  rnn::CellParams best_params;
  TrainReport report;
};

/// All L1 frame changes of consecutive frames across the given pieces, the
/// population the epsilon quantile is calibrated on.
std::vector<double> collect_transition_changes(std::span<const corpus::Piece> pieces);

/// Unweighted mean cross-entropy per predicted transition over whole pieces,
/// states reset per piece.
double evaluate_mce(const rnn::CellParams& params,
                    std::span<const corpus::Piece> test_pieces,
                    const ObjectiveConfig& config);

/// Full training run: epochs of (sample -> gradients -> clip -> rmsprop),
/// test MCE after every epoch, parameters of the best epoch kept, early
/// stopping after `patience` epochs without improvement.
TrainResult train_model(rnn::CellKind kind, Index hidden_size,
                        std::span<const corpus::Piece> train_pieces,
                        std::span<const corpus::Piece> test_pieces,
                        const ObjectiveConfig& objective,
                        const TrainConfig& config);

} // namespace tonalexp::trainer

#endif
