#ifndef TONALEXP_PROBETONE_STATS_HPP
#define TONALEXP_PROBETONE_STATS_HPP

#include <span>
#include <utility>

#include "tonalexp/types.hpp"

namespace tonalexp::probetone {

/// v / sum(v). Requires nonnegative entries and a strictly positive sum.
Vector to_distribution(const Vector& v);

/// sum_i p_i log(p_i / q_i), with 0 log 0 := 0. Throws when q_i = 0 meets
/// p_i > 0. Tiny negative rounding residue is clamped to zero.
double kl_divergence(const Vector& p, const Vector& q);

/// Sample Pearson correlation. Throws on length < 2 or zero variance.
double pearson(const Vector& a, const Vector& b);

struct KsTest {
  double statistic = 0.0;  // sup |ECDF_a - ECDF_b|
  double p_value = 1.0;    // asymptotic Kolmogorov distribution
};

/// Two-sample Kolmogorov-Smirnov test with effective size
/// ne = |a| |b| / (|a| + |b|).
KsTest ks_two_sample(std::span<const double> a, std::span<const double> b);

} // namespace tonalexp::probetone

#endif
