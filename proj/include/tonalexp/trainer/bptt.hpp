#ifndef TONALEXP_TRAINER_BPTT_HPP
#define TONALEXP_TRAINER_BPTT_HPP

#include <vector>

#include "tonalexp/corpus/corpus.hpp"
#include "tonalexp/rnn/cell.hpp"
#include "tonalexp/trainer/objective.hpp"

namespace tonalexp::trainer {

/// Gradient tensors, index-aligned with CellParams::tensors.
using Gradients = std::vector<Matrix>;

Gradients zeros_like(const rnn::CellParams& params);

struct BatchLoss {
  double weighted_ce = 0.0;    // mean weighted CE per transition
  double unweighted_ce = 0.0;  // mean plain CE per transition
};

/// Forward-only evaluation of the batch objective via rnn::step. The
/// finite-difference gradient check differentiates this scalar.
BatchLoss batch_objective(const rnn::CellParams& params,
                          const corpus::Batch& batch,
                          const ObjectiveConfig& config);

struct BpttResult {
  BatchLoss loss;
  Gradients gradients;
};

/// Exact gradients of the mean weighted cross-entropy of a batch with
/// respect to every parameter tensor. Sequences start from zero states and
/// are backpropagated over their whole window, which therefore must not
/// exceed `truncation` steps.
BpttResult bptt_gradients(const rnn::CellParams& params,
                          const corpus::Batch& batch,
                          const ObjectiveConfig& config, int truncation);

} // namespace tonalexp::trainer

#endif
