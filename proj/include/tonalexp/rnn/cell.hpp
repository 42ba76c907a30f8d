#ifndef TONALEXP_RNN_CELL_HPP
#define TONALEXP_RNN_CELL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tonalexp/dsp/cqt.hpp"
#include "tonalexp/types.hpp"

namespace tonalexp::rnn {

/// Recurrent cell variants. All share one recurrent layer of tanh-bounded
/// hidden units and a sigmoid output layer over the input bins. The
/// multiplicative-integration (MI) kinds replace every additive Wx + Uh
/// pre-activation with the gated product form of mi_aggregate.
enum class CellKind { vanilla, lstm, gru, vanilla_mi, lstm_mi };

std::string to_string(CellKind kind);
CellKind cell_kind_from_string(std::string_view name);

/// All learnable tensors of one cell, in a fixed per-kind order. Bias and
/// gating vectors are stored as single-column matrices so that optimizers,
/// gradient checks, and checkpoints can treat every tensor uniformly.
struct CellParams {
  CellKind kind = CellKind::vanilla;
  Index input_size = 0;
  Index hidden_size = 0;
  std::vector<std::string> names;
  std::vector<Matrix> tensors;

  int index_of(std::string_view name) const;
  const Matrix& at(std::string_view name) const { return tensors[static_cast<size_t>(index_of(name))]; }
  Matrix& at(std::string_view name) { return tensors[static_cast<size_t>(index_of(name))]; }
};

/// Hidden activations (and the LSTM memory cell) for a batch of sequences,
/// one column per sequence.
struct RnnState {
  Matrix hidden;
  Matrix cell;  // used by the LSTM kinds only

  static RnnState zeros(const CellParams& params, Index batch = 1);
};

/// Sigmoid outputs, one column per sequence; values lie strictly in (0, 1).
using PredictionFrame = Vector;

/// Tensor names and shapes for a kind, without allocating values.
std::vector<std::pair<std::string, std::pair<Index, Index>>> tensor_layout(
    CellKind kind, Index input_size, Index hidden_size);

/// Exact learnable parameter count for a kind.
Index param_count(CellKind kind, Index input_size, Index hidden_size);

/// Seeded initialization: input and output weights uniform in
/// +-sqrt(6 / (fan_in + fan_out)), recurrent weights orthogonal, biases zero
/// except the LSTM forget gate (one), MI gains alpha = 1 and betas = 0.5.
CellParams init_params(CellKind kind, Index input_size, Index hidden_size,
                       uint64_t seed);

/// alpha.*a.*b + beta1.*a + beta2.*b + bias, applied column-wise over a
/// batch. a and b are H x S; the gain vectors are length H.
Matrix mi_aggregate(const Matrix& a, const Matrix& b, const Vector& alpha,
                    const Vector& beta1, const Vector& beta2,
                    const Vector& bias);

/// Advances the state by one input column-batch (bins x S) and returns the
/// sigmoid output (bins x S).
Matrix step(const CellParams& params, RnnState& state, const Matrix& x);

/// Single-frame convenience overload.
PredictionFrame step(const CellParams& params, RnnState& state, const Vector& x);

/// Runs a whole sequence from a zero state, left to right.
struct ForwardResult {
  std::vector<Vector> predictions;
  RnnState final_state;
};

ForwardResult forward(const CellParams& params, const std::vector<Vector>& inputs);
ForwardResult forward(const CellParams& params, const dsp::Spectrogram& spectrogram);

} // namespace tonalexp::rnn

#endif
