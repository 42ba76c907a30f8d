#ifndef TONALEXP_TRAINER_OBJECTIVE_HPP
#define TONALEXP_TRAINER_OBJECTIVE_HPP

#include <span>

#include "tonalexp/types.hpp"

namespace tonalexp::trainer {

/// Change-weighted cross-entropy settings. Transitions whose L1 frame
/// change is at most epsilon are down-weighted by beta; epsilon is
/// calibrated so that the configured quantile of training transitions
/// falls below it.
struct ObjectiveConfig {
  double beta = 1e-3;
  double epsilon = 0.0;
  double quantile = 0.505;
  double output_clamp = 1e-7;  // eta: floor/ceiling applied to predictions

  void validate() const;
};

/// Per-bin Bernoulli cross-entropy summed over bins, with predictions
/// clamped into [eta, 1 - eta]. Targets are continuous in [0, 1].
double cross_entropy(const Vector& prediction, const Vector& target, double eta);

/// L1 distance between consecutive frames (Eq. of the weighting rule).
double frame_change(const Vector& x_t, const Vector& x_next);

/// Smallest observed change c with empirical P(change <= c) >= quantile.
double calibrate_epsilon(std::span<const double> changes, double quantile = 0.505);

/// Weight applied to one transition: 1 above epsilon, beta at or below it.
double transition_weight(double change, const ObjectiveConfig& config);

double weighted_ce(const Vector& prediction, const Vector& x_t,
                   const Vector& x_next, const ObjectiveConfig& config);

} // namespace tonalexp::trainer

#endif
