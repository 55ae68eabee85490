///
/// \file specfun.hpp
///
/// Log-gamma, digamma, the regularized incomplete beta function and the
/// regularized Gauss hypergeometric function 2F1(a,b;c;z)/Gamma(c), on the
/// real parameter ranges used by the cap potentials.
///
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sphereq::specfun {

namespace detail {

template <typename T>
T sinpi(T x) {
  // Reduce first so that sin(pi*x) keeps full relative accuracy near integers.
  const T n = std::round(x);
  const T r = x - n;
  const T s = std::sin(std::numbers::pi_v<T> * r);
  return (static_cast<long long>(n) % 2 == 0) ? s : -s;
}

// Lanczos approximation, g = 7, n = 9. Valid for x >= 0.5.
template <typename T>
T ln_gamma_lanczos(T x) {
  static constexpr std::array<double, 9> coef = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr T g = 7;
  const T xm1 = x - 1;
  T sum = static_cast<T>(coef[0]);
  for (int i = 1; i < 9; ++i) sum += static_cast<T>(coef[i]) / (xm1 + i);
  const T t = xm1 + g + T(0.5);
  const T half_log_2pi = T(0.91893853320467274178032973640562);
  return half_log_2pi + (xm1 + T(0.5)) * std::log(t) - t + std::log(sum);
}

inline void require(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
template <typename T>
T ln_gamma(T x) {
  detail::require(x > 0 && std::isfinite(x), "ln_gamma: argument must be positive and finite");
  // Integers 1 and 2 are exact zeros; Lanczos leaves a few ulps there.
  if (x == T(1) || x == T(2)) return T(0);
  if (x < T(0.5)) {
    // Reflection keeps accuracy for small arguments.
    return std::log(std::numbers::pi_v<T> / detail::sinpi(x)) - detail::ln_gamma_lanczos(T(1) - x);
  }
  return detail::ln_gamma_lanczos(x);
}

/// 1/Gamma(x) for any real x; zero at the poles of Gamma.
template <typename T>
T rgamma(T x) {
  if (x > 0) return std::exp(-ln_gamma(x));
  if (x == std::round(x)) return T(0);
  // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
  return detail::sinpi(x) * std::exp(ln_gamma(T(1) - x)) / std::numbers::pi_v<T>;
}

/// Digamma psi(x) = Gamma'(x)/Gamma(x) for x > 0.
template <typename T>
T digamma(T x) {
  detail::require(x > 0 && std::isfinite(x), "digamma: argument must be positive and finite");
  T shift = 0;
  while (x < T(10)) {
    shift -= T(1) / x;
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  // Asymptotic series with Bernoulli numbers B_2 .. B_14.
  const T tail =
      inv2 * (T(1) / 12 -
              inv2 * (T(1) / 120 -
                      inv2 * (T(1) / 252 -
                              inv2 * (T(1) / 240 -
                                      inv2 * (T(1) / 132 -
                                              inv2 * (T(691) / 32760 - inv2 * (T(1) / 12)))))));
  return shift + std::log(x) - T(0.5) * inv - tail;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
template <typename T>
T betacf(T a, T b, T x) {
  constexpr int max_iter = 10000;
  const T eps = std::numeric_limits<T>::epsilon();
  const T tiny = std::numeric_limits<T>::min() / eps;
  const T qab = a + b;
  const T qap = a + 1;
  const T qam = a - 1;
  T c = 1;
  T d = 1 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1 / d;
  T h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    T aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    const T del = d * c;
    h *= del;
    if (std::abs(del - 1) <= eps) return h;
  }
  throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
template <typename T>
T reg_inc_beta(T x, T a, T b) {
  detail::require(x >= 0 && x <= 1, "reg_inc_beta: x must lie in [0,1]");
  detail::require(a > 0 && b > 0, "reg_inc_beta: a and b must be positive");
  if (x == 0) return T(0);
  if (x == 1) return T(1);
  const T log_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
  const T front = std::exp(log_front);
  // The continued fraction converges fast for x < (a+1)/(a+b+2); use the
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
  if (x < (a + 1) / (a + b + 2)) return front * detail::betacf(a, b, x) / a;
  return T(1) - front * detail::betacf(b, a, T(1) - x) / b;
}

/// Olver's regularized hypergeometric function 2F1(a,b;c;z)/Gamma(c) for
/// z in [0,1), summed as a power series whose k-th term carries
/// 1/Gamma(c+k). Finite at the poles of Gamma(c).
template <typename T>
T reg_hyp2f1(T a, T b, T c, T z) {
  detail::require(z >= 0 && z < 1, "reg_hyp2f1: z must lie in [0,1)");
  constexpr long max_terms = 2000000;
  const T eps = std::numeric_limits<T>::epsilon();

  long k = 0;
  T term = rgamma(c);
  if (c <= 0 && c == std::round(c)) {
    // Terms k <= -c vanish; the first survivor has c + k == 1.
    const long k0 = static_cast<long>(1 - c);
    term = 1;
    for (long j = 0; j < k0; ++j) term *= (a + j) * (b + j) * z / (j + 1);
    k = k0;
  }
  T sum = term;
  for (; k < max_terms; ++k) {
    const T ratio = (a + k) * (b + k) * z / ((k + 1) * (c + k));
    term *= ratio;
    sum += term;
    if (term == 0) break;
    if (std::abs(term) <= eps * std::abs(sum) && std::abs(ratio) < 1) {
      // Remaining tail is bounded by a geometric series with this ratio.
      const T tail = std::abs(term) * std::abs(ratio) / (1 - std::abs(ratio));
      if (tail <= eps * std::abs(sum)) break;
    }
  }
  return sum;
}

}  // namespace sphereq::specfun
