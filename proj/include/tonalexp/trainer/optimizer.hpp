#ifndef TONALEXP_TRAINER_OPTIMIZER_HPP
#define TONALEXP_TRAINER_OPTIMIZER_HPP

#include <cstdint>

#include "tonalexp/rnn/cell.hpp"
#include "tonalexp/trainer/bptt.hpp"

namespace tonalexp::trainer {

/// Full training regime: RMSProp over change-weighted CE, value-clipped
/// gradients, windows of seq_len steps, early stopping on the test MCE.
struct TrainConfig {
  double learning_rate = 1e-3;
  int truncation = 100;
  double clip = 1.0;
  int batch_size = 20;
  int seq_len = 100;
  int patience = 100;
  int max_epochs = 2000;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-6;
  uint64_t seed = 0;

  void validate() const;
};

/// Per-parameter moving average of squared gradients.
struct OptimizerState {
  std::vector<Matrix> acc;

  static OptimizerState zeros_like(const rnn::CellParams& params);
};

/// Elementwise clamp of every gradient tensor into [-limit, limit].
void clip_gradients(Gradients& grads, double limit);

/// acc <- rho acc + (1 - rho) g^2;  p <- p - lr g / sqrt(acc + eps).
void rmsprop_step(rnn::CellParams& params, const Gradients& grads,
                  OptimizerState& state, const TrainConfig& config);

} // namespace tonalexp::trainer

#endif
