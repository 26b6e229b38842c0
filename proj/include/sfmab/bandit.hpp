#ifndef SFMAB_BANDIT_HPP
#define SFMAB_BANDIT_HPP

// Scale-free adversarial bandit: log-barrier AdaFTRL (alpha = n, beta = 1)
// run on importance-weighted loss estimates, with the FTRL iterate mixed
// toward uniform by an exploration rate gamma_t that is either the fixed
// schedule min(1/2, sqrt(n/t)) or adapted to the observed losses.
//
// Also an Exp3 baseline that needs the loss scale G up front.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfmab/errors.hpp"
#include "sfmab/ftrl.hpp"
#include "sfmab/potential.hpp"
#include "sfmab/random.hpp"
#include "sfmab/simplex.hpp"

namespace sfmab {

/// Inverse-CDF lookup: smallest i with u < sum_{j <= i} probs[j].
inline std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the last partial sum.
  std::size_t last = probs.size() - 1;
  while (last > 0 && probs[last] <= 0.0) --last;
  return last;
}

enum class Exploration {
  kNonAdaptive,  // gamma_t = min(1/2, sqrt(n/t))
  kAdaptive,     // gamma_t = n / (2n + sum_s Gamma_s(gamma_{s-1}))
};

inline std::string_view to_string(Exploration e) {
  return e == Exploration::kNonAdaptive ? "non-adaptive" : "adaptive";
}

/// p' = (1 - gamma) p + gamma / n.
inline SimplexPoint sampling_distribution(const SimplexPoint& p, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) {
    throw DomainError("sampling_distribution: gamma must lie in [0, 1/2], got " +
                      std::to_string(gamma));
  }
  const double floor = gamma / static_cast<double>(p.size());
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - gamma) * p[i] + floor;
  return SimplexPoint(std::move(out));
}

/// Importance-weighted estimate (raw_loss / prob) e_arm.
struct IwEstimate {
  std::size_t arm = 0;
  double raw_loss = 0.0;
  double prob = 1.0;
  std::size_t arms = 1;

  double value() const { return raw_loss / prob; }

  std::vector<double> dense() const {
    std::vector<double> v(arms, 0.0);
    v[arm] = value();
    return v;
  }
};

inline IwEstimate iw_estimate(std::size_t arm, double raw_loss, const SimplexPoint& pprime) {
  if (arm >= pprime.size()) throw DomainError("iw_estimate: arm out of range");
  if (!(pprime[arm] > 0.0)) throw DomainError("iw_estimate: sampled arm has zero probability");
  if (!std::isfinite(raw_loss)) throw DomainError("iw_estimate: non-finite loss");
  return IwEstimate{arm, raw_loss, pprime[arm], pprime.size()};
}

struct BanditState {
  FtrlState<LogBarrier> ftrl;
  double gamma = 0.5;       // gamma_t
  double gamma_sum = 0.0;   // sum_s Gamma_s(gamma_{s-1}); adaptive exploration only
  Exploration option = Exploration::kNonAdaptive;
  std::size_t t = 0;        // rounds completed
  Rng rng;

  static BanditState initial(std::size_t n, Exploration option, std::uint64_t seed) {
    if (n == 0) throw DomainError("BanditState: need at least one arm");
    const double nd = static_cast<double>(n);
    return BanditState{FtrlState<LogBarrier>::initial(n, nd, 1.0), 0.5, 0.0, option, 0,
                       make_rng(seed)};
  }

  std::size_t arms() const { return ftrl.size(); }
};

struct GammaUpdate {
  double gamma = 0.5;      // gamma_t
  double increment = 0.0;  // Gamma_t(gamma_{t-1}); zero for the fixed schedule
};

/// Exploration rate after the round in progress (round state.t + 1).
///
/// The adaptive increment is Gamma_t(gamma) = gamma |l| / ((1 - gamma) p_t(i) + gamma/n),
/// evaluated at gamma_{t-1} and the pre-update iterate p_t.
inline GammaUpdate update_gamma(const BanditState& state, const IwEstimate& est) {
  const double n = static_cast<double>(state.arms());
  if (state.option == Exploration::kNonAdaptive) {
    const double t = static_cast<double>(state.t + 1);
    return {std::min(0.5, std::sqrt(n / t)), 0.0};
  }
  const double g = state.gamma;
  const double denom = (1.0 - g) * state.ftrl.current[est.arm] + g / n;
  const double increment = g * std::abs(est.raw_loss) / denom;
  // Parenthesized to match the stored sum, so gamma is exactly non-increasing.
  return {n / (2.0 * n + (state.gamma_sum + increment)), increment};
}

/// One round of play, as seen by the learner and the harness.
struct BanditRound {
  std::size_t t = 0;  // 1-based round index
  std::size_t arm = 0;
  double loss = 0.0;        // l_t(i_t), the only coordinate observed
  double prob = 1.0;        // p'_t(i_t)
  double gamma_prev = 0.0;  // gamma_{t-1}
  double gamma = 0.0;       // gamma_t
  double eta_prev = 0.0;    // eta_{t-1}
  double eta = 0.0;         // eta_t
  double gap = 0.0;         // M_t(eta_{t-1}) on the estimate
  std::vector<double> iterate;   // p_t
  std::vector<double> sampling;  // p'_t
};

/// Plays one round: sample from p'_t, observe l_t(i_t), form the IW estimate,
/// update gamma, then take an AdaFTRL step on the estimate.
inline BanditRound play_round(BanditState& state, std::span<const double> true_loss) {
  const std::size_t n = state.arms();
  if (true_loss.size() != n) throw DomainError("play_round: loss vector has the wrong length");
  for (double l : true_loss) {
    if (!std::isfinite(l)) throw DomainError("play_round: non-finite loss");
  }

  BanditRound rec;
  rec.t = state.t + 1;
  rec.gamma_prev = state.gamma;
  rec.eta_prev = state.ftrl.eta;
  const SimplexPoint pprime = sampling_distribution(state.ftrl.current, state.gamma);
  rec.iterate.assign(state.ftrl.current.coords().begin(), state.ftrl.current.coords().end());
  rec.sampling.assign(pprime.coords().begin(), pprime.coords().end());

  rec.arm = sample_index(pprime.coords(), uniform01(state.rng));
  rec.loss = true_loss[rec.arm];
  const IwEstimate est = iw_estimate(rec.arm, rec.loss, pprime);
  rec.prob = est.prob;

  const GammaUpdate gu = update_gamma(state, est);
  const double gap_before = state.ftrl.gap_sum;
  state.ftrl = adaftrl_step(state.ftrl, est.dense());
  state.gamma = gu.gamma;
  state.gamma_sum += gu.increment;
  state.t += 1;

  rec.gamma = state.gamma;
  rec.eta = state.ftrl.eta;
  rec.gap = state.ftrl.gap_sum - gap_before;
  return rec;
}

// ---------------------------------------------------------------------------
// Exp3 baseline.

struct Exp3State {
  std::vector<double> cum_estimate;
  double eta = 0.0;
  double scale = 1.0;  // G
  std::size_t t = 0;
  Rng rng;

  /// eta = sqrt(ln n / (T n)) / G with the horizon known in advance.
  static Exp3State initial(std::size_t n, std::size_t horizon, double scale, std::uint64_t seed) {
    if (n == 0) throw DomainError("Exp3State: need at least one arm");
    if (horizon == 0) throw DomainError("Exp3State: horizon must be positive");
    detail::require_positive(scale, "scale");
    const double nd = static_cast<double>(n);
    const double eta =
        n == 1 ? 0.0 : std::sqrt(std::log(nd) / (static_cast<double>(horizon) * nd)) / scale;
    return Exp3State{std::vector<double>(n, 0.0), eta, scale, 0, make_rng(seed)};
  }

  /// Exponential weights on the cumulative estimates.
  SimplexPoint weights() const {
    const double lo = *std::min_element(cum_estimate.begin(), cum_estimate.end());
    std::vector<double> w(cum_estimate.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = std::exp(-eta * (cum_estimate[i] - lo));
      total += w[i];
    }
    for (double& x : w) x /= total;
    return SimplexPoint(std::move(w));
  }
};

/// Throws ScaleViolation when the observed loss exceeds the scale G in magnitude.
inline BanditRound exp3_round(Exp3State& state, std::span<const double> true_loss) {
  const std::size_t n = state.cum_estimate.size();
  if (true_loss.size() != n) throw DomainError("exp3_round: loss vector has the wrong length");

  BanditRound rec;
  rec.t = state.t + 1;
  rec.eta_prev = rec.eta = state.eta;
  const SimplexPoint p = state.weights();
  rec.iterate.assign(p.coords().begin(), p.coords().end());
  rec.sampling = rec.iterate;
  rec.arm = sample_index(p.coords(), uniform01(state.rng));
  rec.loss = true_loss[rec.arm];
  rec.prob = p[rec.arm];
  if (!(std::abs(rec.loss) <= state.scale)) {
    throw ScaleViolation("exp3: observed loss " + std::to_string(rec.loss) +
                         " exceeds the scale G = " + std::to_string(state.scale));
  }
  state.cum_estimate[rec.arm] += rec.loss / rec.prob;
  state.t += 1;
  return rec;
}

// ---------------------------------------------------------------------------
// Common policy interface.

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t arms() const = 0;
  virtual BanditRound play(std::span<const double> loss) = 0;
};

class ScaleFreeBandit final : public Policy {
 public:
  ScaleFreeBandit(std::size_t n, Exploration option, std::uint64_t seed)
      : state_(BanditState::initial(n, option, seed)) {}

  std::string_view name() const override {
    return state_.option == Exploration::kNonAdaptive ? "scale-free-opt1" : "scale-free-opt2";
  }
  std::size_t arms() const override { return state_.arms(); }
  BanditRound play(std::span<const double> loss) override { return play_round(state_, loss); }

  const BanditState& state() const { return state_; }

 private:
  BanditState state_;
};

class Exp3 final : public Policy {
 public:
  Exp3(std::size_t n, std::size_t horizon, double scale, std::uint64_t seed)
      : state_(Exp3State::initial(n, horizon, scale, seed)) {}

  std::string_view name() const override { return "exp3"; }
  std::size_t arms() const override { return state_.cum_estimate.size(); }
  BanditRound play(std::span<const double> loss) override { return exp3_round(state_, loss); }

  const Exp3State& state() const { return state_; }

 private:
  Exp3State state_;
};

}  // namespace sfmab

#endif  // SFMAB_BANDIT_HPP
