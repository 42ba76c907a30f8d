#include "tonalexp/trainer/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tonalexp::trainer {

GradCheckResult gradient_check(rnn::CellKind kind, Index input_size,
                               Index hidden_size, int seq_len, int batch_size,
                               uint64_t seed, double fd_step) {
  rnn::CellParams params = rnn::init_params(kind, input_size, hidden_size, seed);

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  corpus::Batch batch;
  batch.batch_size = batch_size;
  batch.seq_len = seq_len;
  // targets[t] = inputs[t + 1] over one contiguous synthetic sequence
  std::vector<Matrix> frames(static_cast<size_t>(seq_len) + 1);
  for (auto& frame : frames) {
    frame.resize(input_size, batch_size);
    for (Index i = 0; i < frame.size(); ++i) frame.data()[i] = unit(rng);
  }
  for (int t = 0; t < seq_len; ++t) {
    batch.inputs.push_back(frames[static_cast<size_t>(t)]);
    batch.targets.push_back(frames[static_cast<size_t>(t) + 1]);
  }

  ObjectiveConfig objective;
  std::vector<double> changes;
  for (int t = 0; t < seq_len; ++t)
    for (Index s = 0; s < batch_size; ++s)
      changes.push_back(
          frame_change(batch.inputs[static_cast<size_t>(t)].col(s),
                       batch.targets[static_cast<size_t>(t)].col(s)));
  objective.epsilon = calibrate_epsilon(changes, objective.quantile);

  const Gradients analytic =
      bptt_gradients(params, batch, objective, seq_len).gradients;

  GradCheckResult result;
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    double tensor_worst = 0.0;
    Matrix& tensor = params.tensors[i];
    for (Index e = 0; e < tensor.size(); ++e) {
      const double saved = tensor.data()[e];
      tensor.data()[e] = saved + fd_step;
      const double up = batch_objective(params, batch, objective).weighted_ce;
      tensor.data()[e] = saved - fd_step;
      const double down = batch_objective(params, batch, objective).weighted_ce;
      tensor.data()[e] = saved;

      const double numeric = (up - down) / (2.0 * fd_step);
      const double exact = analytic[i].data()[e];
      const double rel = std::abs(exact - numeric) /
                         std::max({std::abs(exact), std::abs(numeric), 1e-6});
      tensor_worst = std::max(tensor_worst, rel);
    }
    result.per_tensor.emplace_back(params.names[i], tensor_worst);
    result.max_rel_error = std::max(result.max_rel_error, tensor_worst);
  }
  return result;
}

} // namespace tonalexp::trainer
