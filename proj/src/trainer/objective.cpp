#include "tonalexp/trainer/objective.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace tonalexp::trainer {

void ObjectiveConfig::validate() const {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("objective beta must lie in (0, 1]");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("objective quantile must lie in (0, 1)");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("objective epsilon must be nonnegative");
  if (!(output_clamp > 0.0 && output_clamp < 0.5))
    throw std::invalid_argument("output clamp must lie in (0, 0.5)");
}

double cross_entropy(const Vector& prediction, const Vector& target, double eta) {
  if (prediction.size() != target.size())
    throw std::invalid_argument("cross_entropy: length mismatch");
  const auto y = prediction.array().min(1.0 - eta).max(eta);
  return -(target.array() * y.log() +
           (1.0 - target.array()) * (1.0 - y).log())
              .sum();
}

double frame_change(const Vector& x_t, const Vector& x_next) {
  if (x_t.size() != x_next.size())
    throw std::invalid_argument("frame_change: length mismatch");
  return (x_next - x_t).lpNorm<1>();
}

double calibrate_epsilon(std::span<const double> changes, double quantile) {
  if (changes.empty())
    throw std::invalid_argument("cannot calibrate epsilon on an empty set");
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("quantile must lie in (0, 1)");

  std::vector<double> sorted(changes.begin(), changes.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  // Fractions are only reached at the last occurrence of a tied value, so
  // scan positions where the value changes.
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    if (static_cast<double>(i + 1) / m >= quantile) return sorted[i];
  }
  return sorted.back();
}

double transition_weight(double change, const ObjectiveConfig& config) {
  return change > config.epsilon ? 1.0 : config.beta;
}

double weighted_ce(const Vector& prediction, const Vector& x_t,
                   const Vector& x_next, const ObjectiveConfig& config) {
  return transition_weight(frame_change(x_t, x_next), config) *
         cross_entropy(prediction, x_next, config.output_clamp);
}

} // namespace tonalexp::trainer
