#ifndef SFMAB_VERIFICATION_HPP
#define SFMAB_VERIFICATION_HPP

// Randomized property suites for the potential, simplex and FTRL layers.
// Each check draws its own instances from a seed, evaluates one identity or
// inequality on all of them and reports the worst case seen. The CLI's
// `verify` subcommand and the acceptance binary both run these.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sfmab/format.hpp"
#include "sfmab/ftrl.hpp"
#include "sfmab/potential.hpp"
#include "sfmab/simplex.hpp"
#include "sfmab/testing/grid_oracle.hpp"

namespace sfmab {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  double worst = 0.0;  // the statistic compared against `limit`
  double limit = 0.0;
  double seconds = 0.0;
  std::string detail;
};

namespace detail {

using Gen = std::mt19937_64;

// Runs body, converts a thrown exception into a failed result, and times it.
inline CheckResult timed(std::string name, const std::function<void(CheckResult&)>& body) {
  CheckResult r;
  r.name = std::move(name);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::vector<double> random_simplex(Gen& rng, std::size_t n, double floor = 0.02) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> c(n);
  double total = 0.0;
  for (double& x : c) total += (x = floor + unit(rng));
  for (double& x : c) x /= total;
  return c;
}

}  // namespace detail

/// |Breg_f(psi(v) || psi(u)) - Breg_{f*}(u || v)| <= 1e-10 (1 + magnitude).
inline CheckResult check_bregman_transform(std::uint64_t seed, std::size_t cases = 1000) {
  return detail::timed("bregman transform", [&](CheckResult& r) {
    detail::Gen rng(seed);
    r.limit = 1e-10;
    double worst = 0.0;
    auto run = [&](auto potential, double lo, double hi) {
      using P = decltype(potential);
      std::uniform_real_distribution<double> draw(lo, hi);
      for (std::size_t k = 0; k < cases; ++k) {
        const double u = draw(rng);
        const double v = draw(rng);
        const double primal = bregman<P>(P::psi(v), P::psi(u));
        const double dual = dual_bregman<P>(u, v);
        const double mag = std::max(std::abs(primal), std::abs(dual));
        worst = std::max(worst, std::abs(primal - dual) / (1.0 + mag));
      }
    };
    run(LogBarrier{}, -20.0, -0.05);
    run(Exponential{}, -10.0, 5.0);
    r.cases = 2 * cases;
    r.worst = worst;
    r.passed = worst <= r.limit;
  });
}

/// y/x - 1 - ln(y/x) >= (x - y)^2 / (2x) - 1e-12 on a grid of (0, 1]^2.
inline CheckResult check_log_barrier_region(std::size_t grid = 100) {
  return detail::timed("log-barrier local norm region", [&](CheckResult& r) {
    r.limit = 1e-12;
    double worst = -1e300;  // max of rhs - lhs
    const double g = static_cast<double>(grid);
    for (std::size_t i = 1; i <= grid; ++i) {
      for (std::size_t j = 1; j <= grid; ++j) {
        const double x = static_cast<double>(i) / g;
        const double y = static_cast<double>(j) / g;
        const double lhs = y / x - 1.0 - std::log(y / x);
        const double rhs = (x - y) * (x - y) / (2.0 * x);
        worst = std::max(worst, rhs - lhs);
      }
    }
    r.cases = grid * grid;
    r.worst = worst;
    r.passed = worst <= r.limit;
  });
}

/// local_norm_lower_bound <= bregman on random admitted pairs, both certificates.
inline CheckResult check_certificates(std::uint64_t seed, std::size_t cases = 1000) {
  return detail::timed("local-norm certificates", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -1e300;  // max of (lb - breg) / (1 + breg)
    auto run = [&](const auto& cert, double x_lo, double x_hi) {
      using P = typename std::remove_cvref_t<decltype(cert)>::potential_type;
      for (std::size_t k = 0; k < cases; ++k) {
        const double x = x_lo + (x_hi - x_lo) * unit(rng);
        const double top = cert.ceiling(P::inverse(x));
        const double y = top * (1e-6 + (1.0 - 1e-6) * unit(rng));
        if (!cert.admits(y, x)) throw ValidityError("sampled pair not admitted");
        const double lb = local_norm_lower_bound(cert, y, x);
        const double b = bregman<P>(y, x);
        worst = std::max(worst, (lb - b) / (1.0 + b));
      }
    };
    run(log_barrier_certificate(), 1e-6, 1.0);
    run(exponential_certificate(), 1e-3, 20.0);
    r.cases = 2 * cases;
    r.limit = 1e-12;
    r.worst = worst;
    r.passed = worst <= r.limit;
  });
}

/// |sum psi(theta + lambda) - 1| <= 1e-12 on random theta in [-50, 50]^n, plus
/// the theta = (0, -1) instance against (-1 - sqrt 5) / 2.
inline CheckResult check_lambda_solver(std::uint64_t seed, std::size_t cases = 1000) {
  return detail::timed("normalization solver", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::uniform_real_distribution<double> entry(-50.0, 50.0);
    std::uniform_int_distribution<int> size(2, 20);
    double worst = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
      std::vector<double> theta(static_cast<std::size_t>(size(rng)));
      for (double& t : theta) t = entry(rng);
      const double lambda = solve_lambda<LogBarrier>(theta);
      double g = 0.0;
      for (double t : theta) g += LogBarrier::psi(t + lambda);
      worst = std::max(worst, std::abs(g - 1.0));
    }
    const std::vector<double> theta{0.0, -1.0};
    const double golden = std::abs(solve_lambda<LogBarrier>(theta) - (-1.0 - std::sqrt(5.0)) / 2.0);
    r.cases = cases + 1;
    r.limit = 1e-12;
    r.worst = worst;
    r.passed = worst <= 1e-12 && golden <= 1e-10;
    r.detail = "golden-ratio instance error " + format_double(golden);
  });
}

/// Mixability gap against the grid oracle (n in {2, 3}) within 1e-4, and
/// 0 <= M <= min(2 ||l||_inf, (eta/2) p.l^2) + 1e-10.
inline CheckResult check_mixability_gap(std::uint64_t seed, std::size_t cases = 100) {
  return detail::timed("mixability gap vs grid oracle", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst_oracle = 0.0;
    double worst_cap = -1e300;
    std::size_t one_hot = 0;
    for (std::size_t k = 0; k < cases; ++k) {
      const std::size_t n = k % 2 == 0 ? 2 : 3;
      const SimplexPoint p(detail::random_simplex(rng, n, 0.05));
      std::vector<double> loss(n, 0.0);
      if (k % 3 == 0) {
        // Negative one-hot, as an importance-weighted estimate of a negative loss.
        const std::size_t arm = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        loss[arm] = -5.0 * (1.0 + 4.0 * unit(rng));
        ++one_hot;
      } else {
        for (double& l : loss) l = 3.0 * normal(rng);
      }
      const double eta = 0.05 + 2.0 * unit(rng);
      const MixabilityGap gap = mixability_gap<LogBarrier>(p, loss, eta);
      const auto ref = testing::mixability_gap_by_grid<LogBarrier>(p.coords(), loss, eta);
      worst_oracle = std::max(worst_oracle, std::abs(gap.value - ref.value));
      double linf = 0.0;
      double second = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        linf = std::max(linf, std::abs(loss[i]));
        second += p[i] * loss[i] * loss[i];
      }
      const double cap = std::min(2.0 * linf, 0.5 * eta * second);
      worst_cap = std::max({worst_cap, gap.value - cap, -gap.value});
    }
    r.cases = cases;
    r.limit = 1e-4;
    r.worst = worst_oracle;
    r.passed = worst_oracle <= 1e-4 && worst_cap <= 1e-10;
    r.detail = "worst cap violation " + format_double(worst_cap) + ", " + std::to_string(one_hot) +
               " one-hot instances";
  });
}

/// Regret identity residual <= 1e-8 (1 + |LHS|) on AdaFTRL traces with
/// standard-normal losses and shifted-vertex comparators.
inline CheckResult check_regret_equality(std::uint64_t seed, std::size_t cases = 50,
                                         std::size_t n = 5, std::size_t T = 50) {
  return detail::timed("FTRL regret identity", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < cases; ++k) {
      FtrlState<LogBarrier> s = FtrlState<LogBarrier>::initial(n, static_cast<double>(n), 1.0);
      FullInfoTrace trace;
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> loss(n);
        for (double& l : loss) l = normal(rng);
        s = adaftrl_step(s, loss, &trace);
      }
      const SimplexPoint c = SimplexPoint::near_vertex(n, k % n, 0.01 + 0.5 * unit(rng));
      const double lhs = trace_regret(trace, c);
      worst = std::max(worst, verify_regret_equality<LogBarrier>(trace, c) / (1.0 + std::abs(lhs)));
    }
    r.cases = cases;
    r.limit = 1e-8;
    r.worst = worst;
    r.passed = worst <= r.limit;
  });
}

/// AdaFTRL regret inequality slack >= -1e-8 on bounded, signed and
/// importance-weighted one-hot loss traces. Reports the smallest slack.
inline CheckResult check_adaftrl_bound(std::uint64_t seed, std::size_t cases = 100) {
  return detail::timed("AdaFTRL regret bound", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 1e300;
    for (std::size_t k = 0; k < cases; ++k) {
      const std::size_t n = 2 + k % 7;
      const std::size_t T = 50 + (k * 37) % 251;
      FtrlState<LogBarrier> s = FtrlState<LogBarrier>::initial(n, static_cast<double>(n), 1.0);
      FullInfoTrace trace;
      for (std::size_t t = 0; t < T; ++t) {
        std::vector<double> loss(n, 0.0);
        switch (k % 3) {
          case 0:
            for (std::size_t i = 0; i < n; ++i) loss[i] = unit(rng) - (i == 0 ? 0.3 : 0.0);
            break;
          case 1:
            for (double& l : loss) l = 10.0 * normal(rng);
            break;
          default: {
            // l(i) / p'(i) e_i with p'(i) as small as gamma / n.
            const std::size_t arm = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            const double prob = std::max(1e-4, unit(rng)) / static_cast<double>(n);
            loss[arm] = (2.0 * unit(rng) - 1.0) / prob;
            break;
          }
        }
        s = adaftrl_step(s, loss, &trace);
      }
      const double eps = 0.001 + 0.5 * unit(rng);
      for (std::size_t arm = 0; arm < n; ++arm) {
        worst = std::min(worst, verify_adaftrl_bound(trace, arm, eps));
      }
    }
    r.cases = cases;
    r.limit = -1e-8;
    r.worst = worst;
    r.passed = worst >= r.limit;
  });
}

/// Summation bound slack >= 0 on random admissible (M_t, g_t) sequences.
inline CheckResult check_summation_bound(std::uint64_t seed, std::size_t cases = 1000) {
  return detail::timed("summation bound", [&](CheckResult& r) {
    detail::Gen rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 1e300;
    for (std::size_t k = 0; k < cases; ++k) {
      const double L = 0.1 + 10.0 * unit(rng);
      const double alpha = 0.1 + 10.0 * unit(rng);
      const double beta = 0.1 + 5.0 * unit(rng);
      const double A = 0.01 + 20.0 * unit(rng);
      std::vector<double> gaps(1 + static_cast<std::size_t>(200 * unit(rng)));
      for (double& m : gaps) {
        // Mix of zero, interior and maximal gaps.
        const double u = unit(rng);
        m = u < 0.1 ? 0.0 : (u > 0.9 ? L : L * unit(rng));
      }
      // Tightest admissible g_t = M_t / a_{t-1}, sometimes loosened.
      std::vector<double> g(gaps.size());
      double total = 0.0;
      for (std::size_t t = 0; t < gaps.size(); ++t) {
        g[t] = gaps[t] * (beta + total) / alpha * (k % 4 == 0 ? 1.0 + unit(rng) : 1.0);
        total += gaps[t];
      }
      worst = std::min(worst, verify_summation_bound(A, L, alpha, beta, gaps, g));
    }
    r.cases = cases;
    r.limit = 0.0;
    r.worst = worst;
    r.passed = worst >= 0.0;
  });
}

/// All suites with their default sizes, in a fixed order.
inline std::vector<CheckResult> run_property_suites(std::uint64_t seed) {
  return {
      check_bregman_transform(seed + 1),  check_log_barrier_region(),
      check_certificates(seed + 3),       check_lambda_solver(seed + 4),
      check_mixability_gap(seed + 5),     check_regret_equality(seed + 6),
      check_adaftrl_bound(seed + 7),      check_summation_bound(seed + 8),
  };
}

}  // namespace sfmab

#endif  // SFMAB_VERIFICATION_HPP
