#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "msrs/core.hpp"

namespace msrs {

// How a decision threshold maps to a false-alarm probability.
//   paper_literal: P_fa = g * e^-g                        for order 1
//                  P_fa = e^-g * sum_{i=1}^{N-1} g^i/i!   for order N >= 2
//   standard:      P_fa = e^-g * sum_{i=0}^{N-1} g^i/i!   (square-law detector)
// The two differ only by the i = 0 term for N >= 2; for order 1 the literal
// form peaks at e^-1 and is inverted on its decreasing branch g >= 1.
enum class PfaConvention { paper_literal, standard };

namespace detail {

// P[Poisson(lambda) <= m]. Summed outward from the mode so the running term
// never under- or overflows for large lambda.
inline double poisson_cdf(double lambda, long long m) {
  if (m < 0) return 0.0;
  if (lambda <= 0.0) return 1.0;
  const long long k0 = std::min(m, static_cast<long long>(lambda));
  const double log_p0 =
      -lambda + static_cast<double>(k0) * std::log(lambda) -
      std::lgamma(static_cast<double>(k0) + 1.0);
  const double p0 = std::exp(log_p0);
  if (p0 == 0.0) {
    // Anchor mass below double resolution: the CDF is 0 if the mode lies
    // beyond m, otherwise the complement is what vanished.
    return static_cast<double>(m) >= lambda ? 1.0 : 0.0;
  }
  double sum = p0;
  double t = p0;
  for (long long k = k0; k >= 1; --k) {
    t *= static_cast<double>(k) / lambda;
    sum += t;
    if (t <= sum * 1e-18) break;
  }
  t = p0;
  for (long long k = k0 + 1; k <= m; ++k) {
    t *= lambda / static_cast<double>(k);
    sum += t;
    if (t <= sum * 1e-18) break;
  }
  return sum < 1.0 ? sum : 1.0;
}

// P[Poisson(lambda) >= m], accurate in the far upper tail where
// 1 - poisson_cdf(m - 1) would cancel.
inline double poisson_upper_tail(double lambda, long long m) {
  if (m <= 0) return 1.0;
  if (lambda <= 0.0) return 0.0;
  if (m <= static_cast<long long>(lambda))
    return 1.0 - poisson_cdf(lambda, m - 1);
  const double log_t0 = -lambda + static_cast<double>(m) * std::log(lambda) -
                        std::lgamma(static_cast<double>(m) + 1.0);
  double t = std::exp(log_t0);
  double sum = t;
  for (long long k = m; t > 0.0; ++k) {
    t *= lambda / static_cast<double>(k + 1);
    sum += t;
    if (t <= sum * 1e-18) break;
  }
  return sum < 1.0 ? sum : 1.0;
}

inline double log_poisson_pmf(double lambda, long long k) {
  return -lambda + static_cast<double>(k) * std::log(lambda) -
         std::lgamma(static_cast<double>(k) + 1.0);
}

}  // namespace detail

// Generalized Marcum Q_N(a, b): survival function at b^2 of a noncentral
// chi-square variable with 2N degrees of freedom and noncentrality a^2.
//
// Evaluated as the ascending Poisson mixture of regularized gamma tails,
//   Q_N(a, b) = sum_k pois(k; a^2/2) * P[Poisson(b^2/2) <= N + k - 1],
// with all factors advanced by recurrence. When b < a the complement
// 1 - Q is accumulated instead so no accuracy is lost to cancellation.
// Absolute error is well below 1e-9 over the supported domain.
inline double marcum_q(int order, double a, double b) {
  if (order < 1) throw std::domain_error("marcum_q: order must be >= 1");
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0)
    throw std::domain_error("marcum_q: a and b must be finite and >= 0");
  if (b == 0.0) return 1.0;
  if (a - b >= 12.0) return 1.0;  // 1 - Q_N <= Phi(b - a) < 2e-32

  const double alpha = 0.5 * a * a;  // Poisson mixing rate
  const double beta = 0.5 * b * b;   // gamma tail argument
  const long long n = order;

  long long k0 = 0;
  double w;  // Poisson(alpha) weight at k
  if (alpha < 700.0) {
    w = std::exp(-alpha);
  } else {
    // e^-alpha underflows; start the sum a safe margin below the mode.
    k0 = static_cast<long long>(alpha - 34.0 * std::sqrt(alpha) - 10.0);
    if (k0 < 0) k0 = 0;
    w = std::exp(detail::log_poisson_pmf(alpha, k0));
  }
  double step = std::exp(detail::log_poisson_pmf(beta, n + k0));
  const long long k_cap =
      k0 + static_cast<long long>(alpha + 60.0 * std::sqrt(alpha + 4.0)) + n +
      512;

  if (beta >= alpha) {
    double g = detail::poisson_cdf(beta, n + k0 - 1);
    double q = 0.0;
    double cum_w = 0.0;
    for (long long k = k0; k <= k_cap; ++k) {
      q += w * g;
      cum_w += w;
      if (1.0 - cum_w <= 1e-15) break;
      if (k > static_cast<long long>(alpha) && w * g <= q * 1e-15 + 1e-300)
        break;
      g += step;
      if (g > 1.0) g = 1.0;
      step *= beta / static_cast<double>(n + k + 1);
      w *= alpha / static_cast<double>(k + 1);
    }
    return q < 1.0 ? q : 1.0;
  }

  // b^2 < a^2: Q is close to 1, accumulate 1 - Q.
  double p = detail::poisson_upper_tail(beta, n + k0);
  double s = 0.0;
  double cum_w = 0.0;
  for (long long k = k0; k <= k_cap; ++k) {
    s += w * p;
    cum_w += w;
    if ((1.0 - cum_w) * p <= s * 1e-15 + 1e-300) break;
    p -= step;
    if (p < 0.0) p = 0.0;
    step *= beta / static_cast<double>(n + k + 1);
    w *= alpha / static_cast<double>(k + 1);
  }
  return s < 1.0 ? 1.0 - s : 0.0;
}

// Modified Bessel I_n by its ascending series. Double range only; overflows
// past x ~ 700.
inline double modified_bessel_i(int order, double x) {
  if (order < 0)
    throw std::domain_error("modified_bessel_i: order must be >= 0");
  if (!std::isfinite(x) || x < 0.0)
    throw std::domain_error("modified_bessel_i: x must be finite and >= 0");
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;
  const double half = 0.5 * x;
  double t = std::exp(static_cast<double>(order) * std::log(half) -
                      std::lgamma(static_cast<double>(order) + 1.0));
  double sum = t;
  const double q = half * half;
  for (int k = 0; k < 100000; ++k) {
    t *= q / ((k + 1.0) * (order + k + 1.0));
    sum += t;
    if (t <= sum * 1e-17) break;
  }
  return sum;
}

inline double pfa_of_threshold(double threshold, int order,
                               PfaConvention convention) {
  if (order < 1) throw std::domain_error("pfa_of_threshold: order must be >= 1");
  if (!std::isfinite(threshold) || threshold < 0.0)
    throw std::domain_error(
        "pfa_of_threshold: threshold must be finite and >= 0");
  if (convention == PfaConvention::standard)
    return detail::poisson_cdf(threshold, order - 1);
  if (order == 1) return threshold * std::exp(-threshold);
  return detail::poisson_cdf(threshold, order - 1) - std::exp(-threshold);
}

// Smallest threshold on the decreasing branch of pfa_of_threshold that
// reproduces p_fa. Throws std::domain_error, reporting the attainable
// maximum, when p_fa exceeds the peak of the chosen convention.
inline double solve_threshold(double p_fa, int order,
                              PfaConvention convention) {
  if (!(p_fa > 0.0) || !(p_fa < 1.0) || !std::isfinite(p_fa))
    throw std::domain_error("solve_threshold: p_fa must lie in (0, 1)");
  if (order < 1) throw std::domain_error("solve_threshold: order must be >= 1");

  double lo;
  if (convention == PfaConvention::standard) {
    lo = 0.0;
  } else if (order == 1) {
    lo = 1.0;
  } else {
    // peak of e^-g * sum_{i=1}^{N-1} g^i/i!, at g^(N-1) = (N-1)!
    lo = std::exp(std::lgamma(static_cast<double>(order)) /
                  static_cast<double>(order - 1));
  }
  const double attainable = pfa_of_threshold(lo, order, convention);
  if (p_fa > attainable) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "solve_threshold: p_fa %.6g exceeds the attainable maximum "
                  "%.6g for this order/convention",
                  p_fa, attainable);
    throw std::domain_error(msg);
  }

  double hi = lo > 0.0 ? lo : 1.0;
  while (pfa_of_threshold(hi, order, convention) > p_fa) {
    hi *= 2.0;
    if (hi > 1e9)
      throw std::domain_error("solve_threshold: bracketing failed");
  }
  // strictly decreasing on [lo, inf): pfa(lo) >= p_fa >= pfa(hi)
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (pfa_of_threshold(mid, order, convention) > p_fa)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct DetectorConfig {
  Mode mode = Mode::cooperative;
  int order = 1;  // J^2 pairs when cooperative, 1 otherwise
  double p_fa = 1e-6;
  PfaConvention convention = PfaConvention::paper_literal;
  double threshold = 0.0;  // solved once at construction
};

inline DetectorConfig make_detector(Mode mode, int num_nodes, double p_fa,
                                    PfaConvention convention) {
  if (num_nodes < 1) throw ConfigError("scenario.num_nodes", "must be >= 1");
  if (!(p_fa > 0.0 && p_fa < 1.0))
    throw ConfigError("scenario.p_fa", "must lie in (0, 1)");
  DetectorConfig det;
  det.mode = mode;
  det.order = mode == Mode::cooperative ? num_nodes * num_nodes : 1;
  det.p_fa = p_fa;
  det.convention = convention;
  det.threshold = solve_threshold(p_fa, det.order, convention);
  const double check = pfa_of_threshold(det.threshold, det.order, convention);
  if (std::abs(check - p_fa) > 1e-10 * p_fa)
    throw std::logic_error("make_detector: threshold round-trip failed");
  return det;
}

// Probability that the integrated return at the given RTSN crosses the
// detector threshold.
inline double detection_probability(double rtsn, const DetectorConfig& det) {
  if (!std::isfinite(rtsn) || rtsn < 0.0)
    throw std::domain_error(
        "detection_probability: rtsn must be finite and >= 0");
  return marcum_q(det.order, std::sqrt(2.0 * rtsn),
                  std::sqrt(2.0 * det.threshold));
}

}  // namespace msrs
