#include "tonalexp/probetone/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tonalexp::probetone {

Vector to_distribution(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("empty vector");
  if ((v.array() < 0.0).any())
    throw std::invalid_argument("to_distribution requires nonnegative entries");
  const double total = v.sum();
  if (!(total > 0.0))
    throw std::invalid_argument("to_distribution requires a positive entry");
  return v / total;
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw std::invalid_argument("length mismatch");
  double sum = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (!(q[i] > 0.0))
      throw std::invalid_argument("kl_divergence: q has a zero where p > 0");
    sum += p[i] * std::log(p[i] / q[i]);
  }
  // Gibbs' inequality guarantees nonnegativity; absorb rounding residue.
  if (sum < 0.0 && sum > -1e-9) sum = 0.0;
  return sum;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson needs length >= 2");
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double va = da.squaredNorm(), vb = db.squaredNorm();
  if (va == 0.0 || vb == 0.0)
    throw std::invalid_argument("pearson is undefined for zero variance");
  return da.dot(db) / std::sqrt(va * vb);
}

namespace {

// Kolmogorov survival function Q(lambda) = 2 sum_j (-1)^(j-1) exp(-2 j^2 l^2).
double kolmogorov_q(double lambda) {
  if (lambda < 1e-12) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int j = 1; j <= 1000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-14 * std::abs(sum) || term < 1e-300)
      return std::clamp(2.0 * sum, 0.0, 1.0);
    sign = -sign;
  }
  return 1.0;  // series did not converge; lambda is tiny
}

} // namespace

KsTest ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample requires nonempty samples");

  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double va = sa[ia], vb = sb[ib];
    if (va <= vb) while (ia < sa.size() && sa[ia] == va) ++ia;
    if (vb <= va) while (ib < sb.size() && sb[ib] == vb) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }

  KsTest result;
  result.statistic = d;
  const double ne = na * nb / (na + nb);
  result.p_value = kolmogorov_q(std::sqrt(ne) * d);
  return result;
}

} // namespace tonalexp::probetone
