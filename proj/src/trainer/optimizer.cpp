#include "tonalexp/trainer/optimizer.hpp"

#include <stdexcept>

namespace tonalexp::trainer {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (truncation < 1) throw std::invalid_argument("truncation must be positive");
  if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
  if (batch_size < 1 || seq_len < 1)
    throw std::invalid_argument("batch_size and seq_len must be positive");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be positive");
  if (!(rms_decay > 0.0 && rms_decay < 1.0))
    throw std::invalid_argument("rms_decay must lie in (0, 1)");
  if (!(rms_epsilon > 0.0)) throw std::invalid_argument("rms_epsilon must be positive");
}

OptimizerState OptimizerState::zeros_like(const rnn::CellParams& params) {
  OptimizerState state;
  state.acc = trainer::zeros_like(params);
  return state;
}

void clip_gradients(Gradients& grads, double limit) {
  if (!(limit > 0.0)) throw std::invalid_argument("clip limit must be positive");
  for (Matrix& g : grads) g = g.cwiseMax(-limit).cwiseMin(limit);
}

void rmsprop_step(rnn::CellParams& params, const Gradients& grads,
                  OptimizerState& state, const TrainConfig& cfg) {
  if (grads.size() != params.tensors.size() || state.acc.size() != grads.size())
    throw std::invalid_argument("rmsprop_step: tensor count mismatch");

  for (size_t i = 0; i < grads.size(); ++i) {
    Matrix& acc = state.acc[i];
    const Matrix& g = grads[i];
    acc.array() = cfg.rms_decay * acc.array() +
                  (1.0 - cfg.rms_decay) * g.array().square();
    params.tensors[i].array() -=
        cfg.learning_rate * g.array() / (acc.array() + cfg.rms_epsilon).sqrt();
  }
}

} // namespace tonalexp::trainer
