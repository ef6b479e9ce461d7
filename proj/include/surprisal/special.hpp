#pragma once

// Special functions used by the distribution models.

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "surprisal/error.hpp"

namespace surprisal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Standard Normal distribution function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Upper tail 1 - Phi(x), accurate for large x.
inline double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Inverse of the standard Normal distribution function (Wichura's AS241,
/// PPND16), about 1e-16 relative accuracy. Throws for p outside (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("normal_quantile: p must lie in (0,1)");

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
               45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
               21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num = ((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                            0.24178072517745061177) * r + 1.27045825245236838258) * r +
                          3.64784832476320460504) * r + 5.7694972214606914055) * r +
                        4.6303378461565452959) * r + 1.42343711074968357734;
    const double den = ((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                            0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                          0.68976733498510000455) * r + 1.6763848301838038494) * r +
                        2.05319162663775882187) * r + 1.0;
    value = num / den;
  } else {
    r -= 5.0;
    const double num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                            0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                          0.29656057182850489123) * r + 1.7848265399172913358) * r +
                        5.4637849111641143699) * r + 6.6579046435011037772;
    const double den = ((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                            1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                          0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                        0.59983220655588793769) * r + 1.0;
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

/// log Gamma(x) for x > 0 (Lanczos approximation via Boost.Math).
inline double log_gamma(double x) { return boost::math::lgamma(x); }

/// Student-t distribution function with nu degrees of freedom (standardized).
inline double student_t_cdf(double t, double nu) {
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

/// Upper tail Pr(T > t) for t >= 0, accurate far in the tail.
inline double student_t_ccdf(double t, double nu) {
  if (t < 0.0) return 1.0 - student_t_ccdf(-t, nu);
  return 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + t * t));
}

/// Gamma(shape, rate) distribution function.
inline double gamma_cdf(double y, double shape, double rate) {
  if (y <= 0.0) return 0.0;
  if (!std::isfinite(y)) return 1.0;
  return boost::math::gamma_p(shape, rate * y);
}

inline double gamma_ccdf(double y, double shape, double rate) {
  if (y <= 0.0) return 1.0;
  if (!std::isfinite(y)) return 0.0;
  return boost::math::gamma_q(shape, rate * y);
}

/// Chi-square upper tail with k degrees of freedom.
inline double chi_square_ccdf(double x, double k) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace surprisal
