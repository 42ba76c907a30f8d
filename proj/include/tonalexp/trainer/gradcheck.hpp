#ifndef TONALEXP_TRAINER_GRADCHECK_HPP
#define TONALEXP_TRAINER_GRADCHECK_HPP

#include <string>
#include <vector>

#include "tonalexp/trainer/bptt.hpp"

namespace tonalexp::trainer {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;
};

/// Compares analytic BPTT gradients of the weighted-CE objective against
/// central finite differences of the forward loss, on a random batch of
/// the given geometry. Both weight branches of the objective are exercised
/// by calibrating epsilon on the batch itself. Relative error uses
/// |a - f| / max(|a|, |f|, 1e-6).
GradCheckResult gradient_check(rnn::CellKind kind, Index input_size,
                               Index hidden_size, int seq_len, int batch_size,
                               uint64_t seed, double fd_step = 1e-5);

} // namespace tonalexp::trainer

#endif
