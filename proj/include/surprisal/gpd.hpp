#pragma once

// Peaks-over-threshold tail estimator: a Generalized Pareto Distribution is
// fitted by maximum likelihood to the largest beta fraction of the
// surprisals. The location is pinned at the threshold u.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "surprisal/detail/nelder_mead.hpp"
#include "surprisal/distributions.hpp"
#include "surprisal/error.hpp"

namespace surprisal {

inline constexpr std::size_t kMinExceedances = 20;
inline constexpr double kXiTolerance = 1e-6;
inline constexpr double kXiLower = -1.0;
inline constexpr double kXiUpper = 10.0;
inline constexpr double kDefaultBeta = 0.1;

struct GpdFit {
  double threshold_u = 0.0;
  double scale_sigma = 1.0;
  double shape_xi = 0.0;
  std::size_t n_exceed = 0;
  double beta = 1.0;
  double loglik = 0.0;
};

inline void to_json(nlohmann::json& j, const GpdFit& fit) {
  j = nlohmann::json{{"u", fit.threshold_u},         {"sigma", fit.scale_sigma}, {"xi", fit.shape_xi},
                     {"n_exceed", fit.n_exceed},     {"beta", fit.beta},         {"loglik", fit.loglik}};
}

inline void from_json(const nlohmann::json& j, GpdFit& fit) {
  j.at("u").get_to(fit.threshold_u);
  j.at("sigma").get_to(fit.scale_sigma);
  j.at("xi").get_to(fit.shape_xi);
  j.at("n_exceed").get_to(fit.n_exceed);
  j.at("beta").get_to(fit.beta);
  j.at("loglik").get_to(fit.loglik);
}

struct ThresholdSelection {
  double threshold_u;
  std::vector<double> exceedances;  // s_i - u for s_i > u
};

/// Number of order statistics kept in the tail: ceil(beta * n), robust to
/// products such as 0.1 * 1000 landing a hair above an integer.
inline std::size_t tail_count(std::size_t n, double beta) {
  const double raw = beta * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

/// Threshold at the ceil((1-beta) n)-th smallest surprisal. Non-finite
/// surprisals are excluded from the sample.
inline ThresholdSelection select_threshold(std::span<const double> surprisals, double beta) {
  detail::require(beta > 0.0 && beta < 1.0, "select_threshold: beta must lie in (0,1)");
  std::vector<double> sorted;
  sorted.reserve(surprisals.size());
  for (double s : surprisals)
    if (std::isfinite(s)) sorted.push_back(s);
  const std::size_t n = sorted.size();
  const std::size_t k = tail_count(n, beta);
  if (k < kMinExceedances || k >= n) {
    std::ostringstream os;
    os << "select_threshold: beta*n gives " << k << " exceedances from " << n
       << " finite surprisals; at least " << kMinExceedances << " are required";
    throw ValidationError(os.str());
  }
  std::sort(sorted.begin(), sorted.end());
  const double u = sorted[n - k - 1];
  ThresholdSelection out{u, {}};
  out.exceedances.reserve(k);
  for (std::size_t i = n - k; i < n; ++i)
    if (sorted[i] > u) out.exceedances.push_back(sorted[i] - u);
  return out;
}

/// GPD log-likelihood of exceedances (location 0). -inf outside the support.
inline double gpd_log_likelihood(std::span<const double> exceedances, double sigma, double xi) {
  if (!(sigma > 0.0)) return -kInf;
  const double m = static_cast<double>(exceedances.size());
  double total = -m * std::log(sigma);
  if (std::fabs(xi) <= kXiTolerance) {
    for (double x : exceedances) total -= x / sigma;
    return total;
  }
  const double power = 1.0 + 1.0 / xi;
  for (double x : exceedances) {
    const double t = xi * x / sigma;
    if (t <= -1.0) return -kInf;
    total -= power * std::log1p(t);
  }
  return total;
}

namespace detail {

struct GpdStart {
  double sigma;
  double xi;
};

inline std::vector<GpdStart> gpd_starting_points(std::span<const double> x) {
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  var /= static_cast<double>(x.size() - 1);
  const double xmax = *std::max_element(x.begin(), x.end());

  std::vector<GpdStart> starts;
  // method of moments, valid for xi < 1/2
  if (var > 0.0) {
    const double ratio = m * m / var;
    starts.push_back({0.5 * m * (1.0 + ratio), std::clamp(0.5 * (1.0 - ratio), -0.9, 5.0)});
  }
  starts.push_back({m, 0.0});
  starts.push_back({0.7 * m, 0.3});
  starts.push_back({0.4 * m, 0.7});
  starts.push_back({1.3 * m, -0.25});
  starts.push_back({1.5 * xmax, -0.6});

  // negative shapes need sigma > -xi * max(x)
  for (auto& s : starts)
    if (s.xi < 0.0 && s.sigma <= -s.xi * xmax) s.sigma = -s.xi * xmax * 1.05;
  return starts;
}

}  // namespace detail

/// Maximum-likelihood GPD fit to exceedances over a threshold of zero.
/// Multi-start Nelder-Mead over (log sigma, xi) with xi restricted to (-1, 10);
/// the best log-likelihood wins, ties going to the smaller xi.
inline GpdFit fit_gpd(std::span<const double> exceedances) {
  if (exceedances.size() < kMinExceedances) {
    throw ValidationError("fit_gpd: " + std::to_string(exceedances.size()) + " exceedances; at least " +
                          std::to_string(kMinExceedances) + " are required");
  }
  for (double x : exceedances) detail::require(std::isfinite(x) && x >= 0.0, "fit_gpd: exceedances must be finite and >= 0");
  const auto [lo, hi] = std::minmax_element(exceedances.begin(), exceedances.end());
  detail::require(*hi > 0.0, "fit_gpd: all exceedances are zero");
  detail::require(*hi > *lo, "fit_gpd: all exceedances are equal; the shape is not identifiable");

  auto negloglik = [&](const std::array<double, 2>& p) {
    const double xi = p[1];
    if (!(xi > kXiLower && xi < kXiUpper) || !(std::fabs(p[0]) < 700.0)) return kInf;
    return -gpd_log_likelihood(exceedances, std::exp(p[0]), xi);
  };

  // Coarse runs from every start pick the basin; only the winner is polished.
  detail::SimplexResult<2> best{{0.0, 0.0}, kInf, 0, false};
  std::vector<std::string> trace;
  for (const auto& start : detail::gpd_starting_points(exceedances)) {
    const auto run = detail::nelder_mead<2>(negloglik, {std::log(start.sigma), start.xi}, {0.1, 0.1}, 1e-7, 1e-5);
    std::ostringstream os;
    os << "start(sigma=" << start.sigma << ",xi=" << start.xi << ") -> sigma=" << std::exp(run.x[0])
       << " xi=" << run.x[1] << " loglik=" << -run.value << (run.converged ? "" : " [not converged]");
    trace.push_back(os.str());
    if (!std::isfinite(run.value)) continue;
    const bool better = run.value < best.value - 1e-6 ||
                        (std::fabs(run.value - best.value) <= 1e-6 && run.x[1] < best.x[1]);
    if (better) best = run;
  }
  if (std::isfinite(best.value)) {
    // restart from the optimum to escape premature simplex collapse
    best = detail::nelder_mead<2>(negloglik, best.x, {0.02, 0.02});
    trace.push_back("polished -> sigma=" + std::to_string(std::exp(best.x[0])) + " xi=" + std::to_string(best.x[1]) +
                    (best.converged ? "" : " [not converged]"));
  }
  if (!best.converged || !std::isfinite(best.value))
    throw NumericalError("fit_gpd: no start converged to a finite likelihood optimum", trace);

  GpdFit fit;
  fit.scale_sigma = std::exp(best.x[0]);
  fit.shape_xi = best.x[1];
  fit.n_exceed = exceedances.size();
  fit.loglik = -best.value;
  return fit;
}

/// Threshold selection followed by the fit; the result carries u and beta.
inline GpdFit fit_gpd_tail(std::span<const double> surprisals, double beta = kDefaultBeta) {
  const auto selection = select_threshold(surprisals, beta);
  GpdFit fit = fit_gpd(selection.exceedances);
  fit.threshold_u = selection.threshold_u;
  fit.beta = beta;
  return fit;
}

/// GPD distribution function at surprisal s >= u.
inline double gpd_cdf(const GpdFit& fit, double s) {
  if (s < fit.threshold_u) throw ValidationError("gpd_cdf: s lies below the threshold u");
  const double z = (s - fit.threshold_u) / fit.scale_sigma;
  if (std::fabs(fit.shape_xi) <= kXiTolerance) return -std::expm1(-z);
  const double t = fit.shape_xi * z;
  if (t <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(t) / fit.shape_xi);
}

inline double gpd_quantile(const GpdFit& fit, double p) {
  detail::require(p >= 0.0 && p < 1.0, "gpd_quantile: p must lie in [0,1)");
  const double xi = fit.shape_xi;
  if (std::fabs(xi) <= kXiTolerance) return fit.threshold_u - fit.scale_sigma * std::log1p(-p);
  return fit.threshold_u + fit.scale_sigma * std::expm1(-xi * std::log1p(-p)) / xi;
}

/// beta for s <= u, beta * (1 - P(s)) above.
inline double gpd_tail_prob(const GpdFit& fit, double s) {
  if (std::isnan(s)) return s;
  if (s <= fit.threshold_u) return fit.beta;
  if (s == kInf) return 0.0;
  const double z = (s - fit.threshold_u) / fit.scale_sigma;
  if (std::fabs(fit.shape_xi) <= kXiTolerance) return fit.beta * std::exp(-z);
  const double t = fit.shape_xi * z;
  if (t <= -1.0) return 0.0;
  return fit.beta * std::exp(-std::log1p(t) / fit.shape_xi);
}

/// Inverse-CDF draws from GPD(0, sigma, xi).
inline std::vector<double> gpd_sample(double sigma, double xi, std::size_t n, std::uint64_t seed) {
  detail::require(sigma > 0.0, "gpd_sample: sigma must be positive");
  detail::require(n > 0, "gpd_sample: n must be positive");
  GpdFit unit;
  unit.scale_sigma = sigma;
  unit.shape_xi = xi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = gpd_quantile(unit, uniform(rng));
  return out;
}

struct GpdTailResult {
  GpdFit fit;
  std::vector<double> probs;
};

/// Per-observation GPD tail probabilities; infinite surprisals get 0.
inline GpdTailResult gpd_tail_probs(std::span<const double> surprisals, double beta = kDefaultBeta) {
  GpdTailResult out{fit_gpd_tail(surprisals, beta), std::vector<double>(surprisals.size())};
  for (std::size_t i = 0; i < surprisals.size(); ++i) out.probs[i] = gpd_tail_prob(out.fit, surprisals[i]);
  return out;
}

}  // namespace surprisal
