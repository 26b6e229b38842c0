#ifndef SFMAB_POTENTIAL_HPP
#define SFMAB_POTENTIAL_HPP

// Potentials psi: (-inf, a) -> (0, inf), the separable Legendre functions
// f = integral of psi^{-1} they generate, their convex conjugates, and the
// divergences built from them.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "sfmab/errors.hpp"

namespace sfmab {

/// Static description of a potential. `upper()` is the right end of the
/// domain of psi (possibly +inf); `legendre` is f with f' = psi^{-1};
/// `conjugate` is f*(u) = u psi(u) - f(psi(u)).
template <class P>
concept Potential = requires(double u, double x) {
  { P::name } -> std::convertible_to<std::string_view>;
  { P::upper() } -> std::convertible_to<double>;
  { P::psi(u) } -> std::convertible_to<double>;
  { P::dpsi(u) } -> std::convertible_to<double>;
  { P::inverse(x) } -> std::convertible_to<double>;
  { P::legendre(x) } -> std::convertible_to<double>;
  { P::conjugate(u) } -> std::convertible_to<double>;
};

/// psi(u) = -1/u on (-inf, 0). Generates f(x) = -ln x, the log-barrier.
struct LogBarrier {
  static constexpr std::string_view name = "log-barrier";
  static constexpr double upper() { return 0.0; }
  static double psi(double u) { return -1.0 / u; }
  static double dpsi(double u) { return 1.0 / (u * u); }
  static double inverse(double x) { return -1.0 / x; }
  static double legendre(double x) { return -std::log(x); }
  static double conjugate(double u) { return -1.0 - std::log(-u); }

  // y/x - 1 - ln(y/x), written around r = y/x - 1 so that it stays accurate
  // when y is close to x.
  static double divergence(double y, double x) {
    const double r = (y - x) / x;
    return r - std::log1p(r);
  }
};

/// psi(u) = e^u on the whole line. Generates f(x) = x ln x - x.
struct Exponential {
  static constexpr std::string_view name = "exponential";
  static constexpr double upper() { return std::numeric_limits<double>::infinity(); }
  static double psi(double u) { return std::exp(u); }
  static double dpsi(double u) { return std::exp(u); }
  static double inverse(double x) { return std::log(x); }
  static double legendre(double x) { return x * std::log(x) - x; }
  static double conjugate(double u) { return std::exp(u); }

  static double divergence(double y, double x) { return y * std::log(y / x) - y + x; }
};

namespace detail {

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be a positive finite number, got " +
                      std::to_string(x));
  }
}

template <Potential P>
void require_in_domain(double u, const char* what) {
  if (!(u < P::upper()) || std::isnan(u) || std::isinf(u)) {
    throw DomainError(std::string(what) + " = " + std::to_string(u) +
                      " is outside the domain of " + std::string(P::name));
  }
}

}  // namespace detail

/// f'(x) = psi^{-1}(x).
template <Potential P>
double legendre_gradient(double x) {
  return P::inverse(x);
}

/// Breg_f(y || x) = f(y) - f(x) - f'(x)(y - x) for the Legendre function of P.
template <Potential P>
double bregman(double y, double x) {
  detail::require_positive(x, "x");
  detail::require_positive(y, "y");
  if (y == x) return 0.0;
  double value;
  if constexpr (requires { P::divergence(y, x); }) {
    value = P::divergence(y, x);
  } else {
    value = P::legendre(y) - P::legendre(x) - P::inverse(x) * (y - x);
  }
  return value > 0.0 ? value : 0.0;
}

/// Breg_{f*}(u || v) = f*(u) - f*(v) - psi(v)(u - v). Equal to
/// bregman<P>(psi(v), psi(u)).
template <Potential P>
double dual_bregman(double u, double v) {
  detail::require_in_domain<P>(u, "u");
  detail::require_in_domain<P>(v, "v");
  if (u == v) return 0.0;
  const double value = P::conjugate(u) - P::conjugate(v) - P::psi(v) * (u - v);
  return value > 0.0 ? value : 0.0;
}

// ---------------------------------------------------------------------------
// Local-norm lower bounds.

/// Lower-bound certificate for Breg_f(y || x) built from a non-negative
/// offset phi. With u = psi^{-1}(x) and m(u) the slope of the secant of psi
/// over [u, u + phi(u)],
///
///     Breg_f(y || x) >= (x - y)^2 / (2 m(u))   for 0 < y <= psi(u + phi(u)).
template <Potential P>
class LowerBoundCertificate {
 public:
  using potential_type = P;
  using Offset = std::function<double(double)>;

  explicit LowerBoundCertificate(Offset offset) : offset_(std::move(offset)) {}

  /// phi(u); throws ValidityError when phi(u) < 0 or u + phi(u) leaves the domain.
  double offset(double u) const {
    const double phi = offset_(u);
    if (!(phi >= 0.0)) {
      throw ValidityError("certificate offset is negative at u = " + std::to_string(u));
    }
    if (!(u + phi < P::upper())) {
      throw ValidityError("psi(u + phi(u)) does not exist at u = " + std::to_string(u));
    }
    return phi;
  }

  /// psi(u + phi(u)): the largest y the certificate covers at this u.
  double ceiling(double u) const { return P::psi(u + offset(u)); }

  /// m(u) = (psi(u + phi(u)) - psi(u)) / phi(u); the tangent slope when phi(u) = 0.
  double slope(double u) const {
    const double phi = offset(u);
    if (phi == 0.0) return P::dpsi(u);
    return (P::psi(u + phi) - P::psi(u)) / phi;
  }

  bool admits(double y, double x) const {
    if (!(x > 0.0) || !(y > 0.0)) return false;
    const double u = P::inverse(x);
    const double phi = offset_(u);
    if (!(phi >= 0.0) || !(u + phi < P::upper())) return false;
    return y <= P::psi(u + phi);
  }

 private:
  Offset offset_;
};

/// phi(u) = -1 - u, for which m(psi^{-1}(x)) = x. Covers 0 < x, y <= 1.
inline LowerBoundCertificate<LogBarrier> log_barrier_certificate() {
  return LowerBoundCertificate<LogBarrier>([](double u) { return -1.0 - u; });
}

/// phi(u) = 1, for which m(u) = (e - 1) e^u. Covers y <= e x.
inline LowerBoundCertificate<Exponential> exponential_certificate() {
  return LowerBoundCertificate<Exponential>([](double) { return 1.0; });
}

/// (x - y)^2 / (2 m(psi^{-1}(x))), a lower bound on bregman<P>(y, x).
template <Potential P>
double local_norm_lower_bound(const LowerBoundCertificate<P>& cert, double y, double x) {
  detail::require_positive(x, "x");
  detail::require_positive(y, "y");
  const double u = P::inverse(x);
  const double top = cert.ceiling(u);
  if (y > top) {
    throw ValidityError("y = " + std::to_string(y) + " exceeds psi(u + phi(u)) = " +
                        std::to_string(top));
  }
  const double d = x - y;
  return d * d / (2.0 * cert.slope(u));
}

// ---------------------------------------------------------------------------
// Separable regularizer F(x) = sum_i [f(x_i) - f(1/n)].

template <Potential P>
double regularizer(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double offset = P::legendre(1.0 / n);
  double total = 0.0;
  for (double xi : x) {
    detail::require_positive(xi, "coordinate");
    total += P::legendre(xi) - offset;
  }
  return total;
}

/// Breg_F(x || y) = sum_i Breg_f(x_i || y_i).
template <Potential P>
double regularizer_bregman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("regularizer_bregman: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += bregman<P>(x[i], y[i]);
  return total;
}

/// (alpha, beta)-mixed Bregman F(x)/alpha - F(y)/beta - grad F(y).(x - y)/beta.
/// Not a divergence: may be negative when alpha != beta.
template <Potential P>
double mixed_bregman(double alpha, double beta, std::span<const double> x,
                     std::span<const double> y) {
  detail::require_positive(alpha, "alpha");
  detail::require_positive(beta, "beta");
  if (x.size() != y.size()) throw DomainError("mixed_bregman: size mismatch");
  double linear = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    detail::require_positive(y[i], "coordinate");
    linear += P::inverse(y[i]) * (x[i] - y[i]);
  }
  return regularizer<P>(x) / alpha - regularizer<P>(y) / beta - linear / beta;
}

}  // namespace sfmab

#endif  // SFMAB_POTENTIAL_HPP
