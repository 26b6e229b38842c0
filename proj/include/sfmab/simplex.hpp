#ifndef SFMAB_SIMPLEX_HPP
#define SFMAB_SIMPLEX_HPP

// Points of the open probability simplex and the two scalar root-finding
// problems that FTRL with a separable potential regularizer reduces to: the
// normalizer lambda(theta) with sum_i psi(theta_i + lambda) = 1, and the exact
// mixability gap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sfmab/errors.hpp"
#include "sfmab/potential.hpp"

namespace sfmab {

/// Strictly positive probability vector.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-10;

  explicit SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw DomainError("SimplexPoint: empty coordinate vector");
    double total = 0.0;
    for (double c : coords_) {
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("SimplexPoint: coordinate " + std::to_string(c) + " is not positive");
      }
      total += c;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw DomainError("SimplexPoint: coordinates sum to " + std::to_string(total));
    }
  }

  static SimplexPoint uniform(std::size_t n) {
    return SimplexPoint(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  /// (1 - eps) e_arm + eps/n, the interior comparator near vertex `arm`.
  static SimplexPoint near_vertex(std::size_t n, std::size_t arm, double eps) {
    if (arm >= n) throw DomainError("near_vertex: arm out of range");
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("near_vertex: eps must lie in (0, 1]");
    std::vector<double> c(n, eps / static_cast<double>(n));
    c[arm] += 1.0 - eps;
    return SimplexPoint(std::move(c));
  }

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const { return coords_; }
  operator std::span<const double>() const { return coords_; }

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  std::vector<double> coords_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Running per-coordinate sum of loss vectors with Neumaier compensation.
class CumulativeLoss {
 public:
  explicit CumulativeLoss(std::size_t n) : sum_(n, 0.0), carry_(n, 0.0) {}

  void add(std::span<const double> loss) {
    if (loss.size() != sum_.size()) throw DomainError("CumulativeLoss: size mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) accumulate(i, loss[i]);
    ++rounds_;
  }

  /// Adds `value` to a single coordinate (a one-hot loss vector).
  void add_one_hot(std::size_t arm, double value) {
    if (arm >= sum_.size()) throw DomainError("CumulativeLoss: arm out of range");
    accumulate(arm, value);
    ++rounds_;
  }

  std::size_t size() const { return sum_.size(); }
  std::size_t rounds() const { return rounds_; }
  double operator[](std::size_t i) const { return sum_[i] + carry_[i]; }

  std::vector<double> values() const {
    std::vector<double> out(sum_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)[i];
    return out;
  }

 private:
  void accumulate(std::size_t i, double value) {
    const double s = sum_[i] + value;
    if (std::abs(sum_[i]) >= std::abs(value)) {
      carry_[i] += (sum_[i] - s) + value;
    } else {
      carry_[i] += (value - s) + sum_[i];
    }
    sum_[i] = s;
  }

  std::vector<double> sum_;
  std::vector<double> carry_;
  std::size_t rounds_ = 0;
};

// ---------------------------------------------------------------------------
// Normalization.

struct Normalization {
  double lambda = 0.0;
  std::vector<double> point;  // psi(theta + lambda)
  int iterations = 0;
};

inline constexpr int kRootIterationCap = 200;

/// Solves sum_i psi(theta_i + lambda) = 1.
///
/// Works in the shifted variable s = lambda + max(theta), where the root is
/// bracketed by [psi^{-1}(1/n), psi^{-1}(2)] independently of theta. The sum
/// is convex and increasing in s, so Newton from the upper end approaches the
/// root monotonically; a bisection step replaces any Newton step that leaves
/// the current bracket.
template <Potential P>
Normalization normalize(std::span<const double> theta) {
  const std::size_t n = theta.size();
  if (n == 0) throw DomainError("normalize: empty theta");
  for (double t : theta) {
    if (!std::isfinite(t)) throw DomainError("normalize: theta has a non-finite entry");
  }
  const double top = *std::max_element(theta.begin(), theta.end());

  Normalization out;
  out.point.resize(n);
  if (n == 1) {
    out.lambda = P::inverse(1.0) - theta[0];
    out.point[0] = 1.0;
    return out;
  }

  auto sum_at = [&](double s, double* slope) {
    double g = 0.0;
    double dg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (theta[i] - top) + s;
      g += P::psi(u);
      if (slope) dg += P::dpsi(u);
    }
    if (slope) *slope = dg;
    return g;
  };

  const double tol = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  double lo = P::inverse(1.0 / static_cast<double>(n));
  double hi = P::inverse(2.0);
  const double g_lo = sum_at(lo, nullptr);
  const double g_hi = sum_at(hi, nullptr);
  if (!(g_lo <= 1.0 + tol) || !(g_hi > 1.0)) {
    throw ConvergenceError("normalize: sum of psi is not monotone across the bracket");
  }

  double s = hi;
  bool converged = false;
  if (std::abs(g_lo - 1.0) <= tol) {
    s = lo;
    converged = true;
  }
  int iter = 0;
  for (; !converged && iter < kRootIterationCap; ++iter) {
    double dg = 0.0;
    const double r = sum_at(s, &dg) - 1.0;
    if (std::abs(r) <= tol) {
      converged = true;
      break;
    }
    if (r > 0.0) {
      hi = s;
    } else {
      lo = s;
    }
    double next = s - r / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) {
      s = next;
      converged = true;
      break;
    }
    s = next;
  }
  if (!converged) {
    throw ConvergenceError("normalize: no convergence after " +
                           std::to_string(kRootIterationCap) + " iterations");
  }

  out.iterations = iter;
  out.lambda = s - top;
  for (std::size_t i = 0; i < n; ++i) out.point[i] = P::psi((theta[i] - top) + s);
  return out;
}

/// lambda(theta): the unique lambda with sum_i psi(theta_i + lambda) = 1.
template <Potential P>
double solve_lambda(std::span<const double> theta) {
  return normalize<P>(theta).lambda;
}

/// FTRL iterate argmin_q F(q) + eta <q, L> over the simplex, i.e.
/// psi(theta + lambda(theta)) with theta = -eta L.
template <Potential P>
SimplexPoint ftrl_iterate(double eta, const CumulativeLoss& cumulative) {
  detail::require_positive(eta, "eta");
  std::vector<double> theta = cumulative.values();
  for (double& t : theta) t *= -eta;
  return SimplexPoint(normalize<P>(theta).point);
}

// ---------------------------------------------------------------------------
// Mixability gap.

struct MixabilityGap {
  double value = 0.0;
  SimplexPoint maximizer;
};

/// M(eta) = sup_q [ <loss, p - q> - Breg_F(q || p) / eta ].
///
/// Stationarity gives f'(q_i) = f'(p_i) - eta loss_i - eta mu, so the
/// maximizer is the normalization of theta_i = psi^{-1}(p_i) - eta loss_i.
/// The supremum is attained in the interior since Breg_F blows up on the
/// boundary.
template <Potential P>
MixabilityGap mixability_gap(const SimplexPoint& p, std::span<const double> loss, double eta) {
  detail::require_positive(eta, "eta");
  const std::size_t n = p.size();
  if (loss.size() != n) throw DomainError("mixability_gap: size mismatch");
  for (double l : loss) {
    if (!std::isfinite(l)) throw DomainError("mixability_gap: non-finite loss");
  }
  if (n == 1 || std::all_of(loss.begin(), loss.end(), [](double l) { return l == 0.0; })) {
    return {0.0, p};
  }

  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = P::inverse(p[i]) - eta * loss[i];
  SimplexPoint q(normalize<P>(theta).point);

  double gain = 0.0;
  double divergence = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gain += loss[i] * (p[i] - q[i]);
    divergence += bregman<P>(q[i], p[i]);
  }
  const double value = gain - divergence / eta;
  return {value > 0.0 ? value : 0.0, std::move(q)};
}

/// (eta/2) <p, loss^2>, the log-barrier upper bound on the mixability gap.
inline double stability_bound(const SimplexPoint& p, std::span<const double> loss, double eta) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += p[i] * loss[i] * loss[i];
  return 0.5 * eta * total;
}

}  // namespace sfmab

#endif  // SFMAB_SIMPLEX_HPP
