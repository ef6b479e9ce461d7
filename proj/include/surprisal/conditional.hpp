#pragma once

// Conditional-distribution surprisals.
//
// Hampel: y_t | window ~ N(m_t, sigma_t^2) with m_t the windowed median,
// a_t the windowed MAD about m_t and sigma_t = max(a_t, min_scale) / Phi^-1(0.75).
// Windows include y_t and are truncated at the series ends.
//
// Binomial smooth: notouts | innings ~ Binomial(innings, p(innings)) with
// logit p a natural cubic spline in log(innings), fitted by unpenalized IRLS.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "surprisal/distributions.hpp"
#include "surprisal/error.hpp"
#include "surprisal/scoring.hpp"
#include "surprisal/special.hpp"

namespace surprisal {

// ---------------------------------------------------------------------------
// Hampel

namespace detail {

inline double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace detail

/// Median of a sample (copied).
inline double median(std::span<const double> values) {
  detail::require(!values.empty(), "median: empty sample");
  std::vector<double> v(values.begin(), values.end());
  return detail::median_of(v);
}

/// Median absolute deviation about the median (unscaled).
inline double mad(std::span<const double> values) {
  const double m = median(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::fabs(values[i] - m);
  return detail::median_of(dev);
}

/// Phi^-1(0.75), the MAD-to-standard-deviation constant for Normal data.
inline double mad_normal_constant() {
  static const double c = normal_quantile(0.75);
  return c;
}

struct HampelModel {
  std::size_t half_window_h = 10;
  std::optional<double> min_scale;  // default: 1e-8 * MAD of the whole series
};

struct HampelSurprisals {
  SurprisalSample sample;
  std::vector<double> medians;  // m_t
  std::vector<double> mads;     // a_t
  std::vector<double> sigmas;   // sigma_t
  double min_scale = 0.0;
};

inline HampelSurprisals hampel_surprisals(std::span<const double> y, const HampelModel& model) {
  const std::size_t n = y.size();
  const std::size_t h = model.half_window_h;
  detail::require(h >= 1, "hampel: half-window h must be at least 1");
  detail::require(n >= 2 * h + 1, "hampel: series of length " + std::to_string(n) +
                                      " is shorter than the window 2h+1 = " + std::to_string(2 * h + 1));
  for (double v : y) detail::require(std::isfinite(v), "hampel: series contains a non-finite value");

  const double min_scale = model.min_scale.value_or(1e-8 * mad(y));
  detail::require(min_scale >= 0.0, "hampel: min_scale must be nonnegative");
  const double c = mad_normal_constant();

  HampelSurprisals out;
  out.min_scale = min_scale;
  out.medians.resize(n);
  out.mads.resize(n);
  out.sigmas.resize(n);
  std::vector<double> surprisals(n);
  std::vector<double> window;
  window.reserve(2 * h + 1);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= h ? t - h : 0;
    const std::size_t hi = std::min(n - 1, t + h);
    window.assign(y.begin() + static_cast<std::ptrdiff_t>(lo), y.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double m = detail::median_of(window);
    for (std::size_t k = 0; k < window.size(); ++k) window[k] = std::fabs(y[lo + k] - m);
    const double a = detail::median_of(window);
    const double scale = std::max(a, min_scale);
    if (!(scale > 0.0)) {
      throw ValidationError("hampel: window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] around t=" + std::to_string(t) + " is constant and min_scale is 0");
    }
    const double sigma = scale / c;
    const double z = (y[t] - m) / sigma;
    out.medians[t] = m;
    out.mads[t] = a;
    out.sigmas[t] = sigma;
    surprisals[t] = kLogSqrt2Pi + std::log(sigma) + 0.5 * z * z;
  }
  std::ostringstream desc;
  desc << "hampel(h=" << h << ",min_scale=" << min_scale << ")";
  out.sample = {Dataset::scalar(std::vector<double>(y.begin(), y.end())), std::move(surprisals), desc.str()};
  return out;
}

/// Assumed-distribution tail probabilities under each point's conditional Normal.
inline TailEstimate hampel_assumed_tail(const HampelSurprisals& h) {
  TailEstimate out{std::vector<double>(h.sample.size()), TailMethod::assumed, std::nullopt, h.sample.model_description};
  for (std::size_t t = 0; t < out.probs.size(); ++t) {
    const double z2 = 2.0 * (h.sample.surprisals[t] - kLogSqrt2Pi - std::log(h.sigmas[t]));
    out.probs[t] = z2 <= 0.0 ? 1.0 : 2.0 * normal_ccdf(std::sqrt(z2));
  }
  return out;
}

/// False anomaly rate of the rule |y_t - m_t| / a_t > tau under Normal data.
inline double hampel_alpha_from_tau(double tau) {
  detail::require(tau > 0.0, "hampel_alpha_from_tau: tau must be positive");
  return 2.0 * normal_ccdf(tau * mad_normal_constant());
}

inline double hampel_tau_from_alpha(double alpha) {
  detail::require(alpha > 0.0 && alpha < 1.0, "hampel_tau_from_alpha: alpha must lie in (0,1)");
  return -normal_quantile(0.5 * alpha) / mad_normal_constant();
}

// ---------------------------------------------------------------------------
// Binomial spline-logistic smooth

/// Natural cubic spline basis (truncated-power form) with K knots: 1, x and
/// K-2 functions that are linear beyond the boundary knots.
inline std::vector<double> natural_spline_basis(double x, std::span<const double> knots) {
  const std::size_t k = knots.size();
  std::vector<double> row{1.0, x};
  if (k < 3) return row;
  auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  auto d = [&](std::size_t j) {
    return (cube(x - knots[j]) - cube(x - knots[k - 1])) / (knots[k - 1] - knots[j]);
  };
  const double last = d(k - 2);
  for (std::size_t j = 0; j + 2 < k; ++j) row.push_back(d(j) - last);
  return row;
}

struct BinomialSmoothFit {
  std::vector<double> knots;         // in log(innings)
  std::vector<double> coefficients;  // one per basis function
  double log_likelihood = 0.0;
  std::size_t iterations = 0;

  double logit(double innings) const {
    const auto basis = natural_spline_basis(std::log(innings), knots);
    double eta = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) eta += basis[j] * coefficients[j];
    return eta;
  }

  double fitted_prob(double innings) const {
    detail::require(innings >= 1.0, "fitted_prob: innings must be at least 1");
    return 1.0 / (1.0 + std::exp(-logit(innings)));
  }
};

struct BinomialSmoothOptions {
  std::vector<double> knot_quantiles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t max_iterations = 100;
  double tolerance = 1e-10;
  std::size_t min_groups = 50;
};

namespace detail {

inline void validate_counts(std::span<const std::int64_t> innings, std::span<const std::int64_t> notouts) {
  require(innings.size() == notouts.size(), "binomial smooth: innings and notouts differ in length");
  for (std::size_t i = 0; i < innings.size(); ++i) {
    if (innings[i] < 1)
      throw ValidationError("binomial smooth: row " + std::to_string(i) + " has innings < 1");
    if (notouts[i] < 0 || notouts[i] > innings[i])
      throw ValidationError("binomial smooth: row " + std::to_string(i) + " has notouts outside [0, innings]");
  }
}

/// Empirical quantile (type 7, linear interpolation).
inline double quantile7(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline BinomialSmoothFit fit_binomial_smooth(std::span<const std::int64_t> innings,
                                             std::span<const std::int64_t> notouts,
                                             const BinomialSmoothOptions& options = {}) {
  detail::validate_counts(innings, notouts);
  const std::size_t n = innings.size();
  if (n < options.min_groups) {
    throw ValidationError("binomial smooth: " + std::to_string(n) + " rows; at least " +
                          std::to_string(options.min_groups) + " are required");
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(static_cast<double>(innings[i]));
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());

  BinomialSmoothFit fit;
  for (double q : options.knot_quantiles) {
    const double k = detail::quantile7(sorted, q);
    if (fit.knots.empty() || k > fit.knots.back() + 1e-9) fit.knots.push_back(k);
  }
  if (fit.knots.size() < 2) fit.knots = {sorted.front(), sorted.back()};

  const std::size_t p = natural_spline_basis(x[0], fit.knots).size();
  Eigen::MatrixXd X(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = natural_spline_basis(x[i], fit.knots);
    for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  Eigen::VectorXd trials(n), successes(n);
  for (std::size_t i = 0; i < n; ++i) {
    trials[static_cast<Eigen::Index>(i)] = static_cast<double>(innings[i]);
    successes[static_cast<Eigen::Index>(i)] = static_cast<double>(notouts[i]);
  }

  auto loglik = [&](const Eigen::VectorXd& eta) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      // y*eta - n*log(1+e^eta), stable for either sign of eta
      const double e = eta[i];
      const double log1pexp = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      total += successes[i] * e - trials[i] * log1pexp;
    }
    return total;
  };

  const double pooled = successes.sum() / trials.sum();
  if (pooled <= 0.0 || pooled >= 1.0)
    throw NumericalError("binomial smooth: pooled proportion is 0 or 1; the logit fit is separated");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  beta[0] = std::log(pooled / (1.0 - pooled));
  Eigen::VectorXd eta = X * beta;
  double current = loglik(eta);
  std::vector<std::string> trace;

  bool converged = false;
  std::size_t iter = 0;
  for (; iter < options.max_iterations && !converged; ++iter) {
    Eigen::VectorXd w(n), z(n);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
      const double var = std::max(mu * (1.0 - mu), 1e-12);
      w[i] = trials[i] * var;
      z[i] = eta[i] + (successes[i] - trials[i] * mu) / (trials[i] * var);
    }
    const Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    const Eigen::VectorXd xtwz = X.transpose() * w.cwiseProduct(z);
    const Eigen::LDLT<Eigen::MatrixXd> solver(xtwx);
    if (solver.info() != Eigen::Success) throw NumericalError("binomial smooth: weighted normal equations are singular", trace);
    Eigen::VectorXd proposal = solver.solve(xtwz);

    // step halving keeps the likelihood non-decreasing
    double next = loglik(X * proposal);
    for (int halving = 0; halving < 30 && !(next >= current - 1e-12); ++halving) {
      proposal = 0.5 * (proposal + beta);
      next = loglik(X * proposal);
    }
    std::ostringstream os;
    os << "iteration " << iter + 1 << ": loglik=" << next;
    trace.push_back(os.str());
    if (!std::isfinite(next)) throw NumericalError("binomial smooth: likelihood became non-finite", trace);

    converged = std::fabs(next - current) <= options.tolerance * (std::fabs(next) + 0.1);
    beta = proposal;
    eta = X * beta;
    current = next;
  }
  if (!converged) throw NumericalError("binomial smooth: IRLS did not converge", trace);

  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (std::fabs(eta[i]) > 30.0)
      throw NumericalError("binomial smooth: fitted probabilities reach 0 or 1 (separation)", trace);
  }

  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.log_likelihood = current;
  fit.iterations = iter;
  return fit;
}

/// s_i = -log Binomial(notouts_i; innings_i, p(innings_i)).
inline SurprisalSample binomial_surprisals(const BinomialSmoothFit& fit, std::span<const std::int64_t> innings,
                                           std::span<const std::int64_t> notouts) {
  detail::validate_counts(innings, notouts);
  std::vector<double> obs(2 * innings.size());
  std::vector<double> s(innings.size());
  for (std::size_t i = 0; i < innings.size(); ++i) {
    const double prob = fit.fitted_prob(static_cast<double>(innings[i]));
    s[i] = -detail::binomial_log_pmf(innings[i], prob, static_cast<double>(notouts[i]));
    obs[2 * i] = static_cast<double>(innings[i]);
    obs[2 * i + 1] = static_cast<double>(notouts[i]);
  }
  return {Dataset(2, std::move(obs)), std::move(s), "binomial(trials=innings,prob=fitted)"};
}

}  // namespace surprisal
