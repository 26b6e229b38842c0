#ifndef SFMAB_FTRL_HPP
#define SFMAB_FTRL_HPP

// Full-information FTRL over the simplex with a separable potential
// regularizer, the AdaFTRL learning-rate schedule
//
//     eta_t = alpha / (beta + sum_{s <= t} M_s(eta_{s-1})),
//
// and checkers for the exact FTRL regret identity and the AdaFTRL regret
// bounds on recorded traces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "sfmab/errors.hpp"
#include "sfmab/potential.hpp"
#include "sfmab/simplex.hpp"

namespace sfmab {

template <Potential P = LogBarrier>
struct FtrlState {
  CumulativeLoss cumloss;
  double eta;
  double gap_sum = 0.0;
  double alpha;
  double beta;
  SimplexPoint current;

  static FtrlState initial(std::size_t n, double alpha, double beta) {
    detail::require_positive(alpha, "alpha");
    detail::require_positive(beta, "beta");
    if (n == 0) throw DomainError("FtrlState: need at least one coordinate");
    return FtrlState{CumulativeLoss(n), alpha / beta, 0.0, alpha, beta, SimplexPoint::uniform(n)};
  }

  std::size_t size() const { return current.size(); }
};

struct FullInfoRecord {
  SimplexPoint iterate;  // p_t
  std::vector<double> loss;
  double eta_prev;  // eta_{t-1}, the rate p_t was computed with
  double eta;       // eta_t, the rate p_{t+1} is computed with
  double gap;       // M_t(eta_{t-1})
  SimplexPoint maximizer;
};

struct FullInfoTrace {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<FullInfoRecord> rounds;
  std::vector<double> final_iterate;  // p_{T+1}

  std::size_t size() const { return rounds.size(); }
};

namespace detail {

template <Potential P>
FtrlState<P> advance(const FtrlState<P>& state, std::span<const double> loss, double next_eta,
                     const MixabilityGap& gap, FullInfoTrace* trace) {
  FtrlState<P> next = state;
  next.gap_sum = state.gap_sum + gap.value;
  next.cumloss.add(loss);
  next.eta = next_eta;
  next.current = ftrl_iterate<P>(next_eta, next.cumloss);
  if (trace) {
    if (trace->rounds.empty()) {
      trace->alpha = state.alpha;
      trace->beta = state.beta;
    }
    trace->rounds.push_back(FullInfoRecord{state.current,
                                           std::vector<double>(loss.begin(), loss.end()),
                                           state.eta, next_eta, gap.value, gap.maximizer});
    trace->final_iterate.assign(next.current.coords().begin(), next.current.coords().end());
  }
  return next;
}

inline void require_finite(std::span<const double> loss) {
  for (double l : loss) {
    if (!std::isfinite(l)) throw DomainError("loss vector has a non-finite entry");
  }
}

}  // namespace detail

/// One AdaFTRL round: M_t is taken at the old rate against the old iterate,
/// then the rate is recomputed, then the next iterate is solved at the new
/// rate over the updated cumulative loss.
template <Potential P>
FtrlState<P> adaftrl_step(const FtrlState<P>& state, std::span<const double> loss,
                          FullInfoTrace* trace = nullptr) {
  if (loss.size() != state.size()) throw DomainError("adaftrl_step: size mismatch");
  detail::require_finite(loss);
  const MixabilityGap gap = mixability_gap<P>(state.current, loss, state.eta);
  // Same sum that advance() stores, so eta is exactly non-increasing.
  const double next_eta = state.alpha / (state.beta + (state.gap_sum + gap.value));
  return detail::advance(state, loss, next_eta, gap, trace);
}

/// One FTRL round with a caller-supplied next rate.
template <Potential P>
FtrlState<P> ftrl_step(const FtrlState<P>& state, std::span<const double> loss, double next_eta,
                       FullInfoTrace* trace = nullptr) {
  if (loss.size() != state.size()) throw DomainError("ftrl_step: size mismatch");
  detail::require_finite(loss);
  detail::require_positive(next_eta, "next_eta");
  const MixabilityGap gap = mixability_gap<P>(state.current, loss, state.eta);
  return detail::advance(state, loss, next_eta, gap, trace);
}

// ---------------------------------------------------------------------------
// Regret checks on traces.

/// sum_t <l_t, p_t - comparator> over a trace.
inline double trace_regret(const FullInfoTrace& trace, const SimplexPoint& comparator) {
  double total = 0.0;
  for (const FullInfoRecord& r : trace.rounds) {
    for (std::size_t i = 0; i < comparator.size(); ++i) {
      total += r.loss[i] * (r.iterate[i] - comparator[i]);
    }
  }
  return total;
}

/// |LHS - RHS| for the FTRL regret identity
///
///   sum_t <l_t, p_t - p>
///     = (Breg_F(p || p_1) - Breg_F(p || p_{T+1})) / eta_T
///       + sum_t [ <l_t, p_t - p_{t+1}> - Breg_F^{eta_t, eta_{t-1}}(p_{t+1} || p_t) ].
template <Potential P = LogBarrier>
double verify_regret_equality(const FullInfoTrace& trace, const SimplexPoint& comparator) {
  const std::size_t T = trace.rounds.size();
  if (T == 0) return 0.0;
  const std::span<const double> p = comparator.coords();

  double lhs = 0.0;
  double rhs_sum = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const FullInfoRecord& r = trace.rounds[t];
    const std::span<const double> next =
        t + 1 < T ? trace.rounds[t + 1].iterate.coords() : std::span<const double>(trace.final_iterate);
    std::vector<double> diff_p(p.size());
    std::vector<double> diff_next(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      diff_p[i] = r.iterate[i] - p[i];
      diff_next[i] = r.iterate[i] - next[i];
    }
    lhs += dot(r.loss, diff_p);
    rhs_sum += dot(r.loss, diff_next) - mixed_bregman<P>(r.eta, r.eta_prev, next, r.iterate.coords());
  }
  const SimplexPoint first = SimplexPoint::uniform(p.size());
  const double eta_last = trace.rounds.back().eta;
  const double boundary = (regularizer_bregman<P>(p, first.coords()) -
                           regularizer_bregman<P>(p, trace.final_iterate)) /
                          eta_last;
  return std::abs(lhs - (boundary + rhs_sum));
}

/// How the regularizer value at the comparator enters the AdaFTRL bound.
enum class RegularizerTerm {
  kLogBound,  // F(1^i_eps) <= n log(1/eps)
  kExact,     // F(1^i_eps) evaluated directly
};

/// RHS - LHS of the log-barrier AdaFTRL regret inequality against the
/// comparator 1^arm_eps:
///
///   sum_t <l_t, p_t - c> <= F (beta/alpha + 2 L/alpha) + 2 L
///                           + sqrt(sum_t <p_t, l_t^2>) (F/sqrt(alpha) + sqrt(alpha))
///
/// with L = max_t ||l_t||_inf. Valid for arbitrary real losses.
inline double verify_adaftrl_bound(const FullInfoTrace& trace, std::size_t arm, double eps,
                                   RegularizerTerm term = RegularizerTerm::kLogBound) {
  if (trace.rounds.empty()) return 0.0;
  const std::size_t n = trace.rounds.front().iterate.size();
  const SimplexPoint c = SimplexPoint::near_vertex(n, arm, eps);

  double lhs = 0.0;
  double linf = 0.0;
  double second_moment = 0.0;
  for (const FullInfoRecord& r : trace.rounds) {
    for (std::size_t i = 0; i < n; ++i) {
      lhs += r.loss[i] * (r.iterate[i] - c[i]);
      linf = std::max(linf, std::abs(r.loss[i]));
      second_moment += r.iterate[i] * r.loss[i] * r.loss[i];
    }
  }
  const double reg = term == RegularizerTerm::kExact
                         ? regularizer<LogBarrier>(c.coords())
                         : static_cast<double>(n) * std::log(1.0 / eps);
  const double a = trace.alpha;
  const double b = trace.beta;
  const double rhs = reg * (b / a + 2.0 * linf / a) + 2.0 * linf +
                     std::sqrt(second_moment) * (reg / std::sqrt(a) + std::sqrt(a));
  return rhs - lhs;
}

/// RHS - LHS of the summation bound
///
///   A / a_T + sum_t M_t <= A (beta/alpha + L/alpha) + L
///                          + sqrt(2 sum_t g_t) (A/sqrt(alpha) + sqrt(alpha)),
///
/// where a_t = alpha / (beta + sum_{s <= t} M_s). Requires 0 <= M_t <= L and
/// M_t / a_{t-1} <= g_t.
inline double verify_summation_bound(double A, double L, double alpha, double beta,
                                     std::span<const double> gaps, std::span<const double> g) {
  detail::require_positive(A, "A");
  detail::require_positive(L, "L");
  detail::require_positive(alpha, "alpha");
  detail::require_positive(beta, "beta");
  if (gaps.size() != g.size()) throw PreconditionError("verify_summation_bound: size mismatch");

  double total = 0.0;
  double g_total = 0.0;
  double a_prev = alpha / beta;
  for (std::size_t t = 0; t < gaps.size(); ++t) {
    const double m = gaps[t];
    if (!(m >= 0.0 && m <= L)) {
      throw PreconditionError("verify_summation_bound: M_t outside [0, L] at t = " +
                              std::to_string(t + 1));
    }
    if (m / a_prev > g[t] * (1.0 + 1e-12) + 1e-300) {
      throw PreconditionError("verify_summation_bound: M_t / a_{t-1} exceeds g_t at t = " +
                              std::to_string(t + 1));
    }
    total += m;
    g_total += g[t];
    a_prev = alpha / (beta + total);
  }
  const double lhs = A / a_prev + total;
  const double rhs = A * (beta / alpha + L / alpha) + L +
                     std::sqrt(2.0 * g_total) * (A / std::sqrt(alpha) + std::sqrt(alpha));
  return rhs - lhs;
}

}  // namespace sfmab

#endif  // SFMAB_FTRL_HPP
