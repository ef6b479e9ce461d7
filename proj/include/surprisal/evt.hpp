#pragma once

// Monte-Carlo checks of the finite-n tail bounds on the maximum surprisal
// M_n = max(s_1..s_n) under sub-Gaussian, sub-exponential and polynomial
// moment regimes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surprisal/distributions.hpp"
#include "surprisal/empirical_tail.hpp"
#include "surprisal/error.hpp"
#include "surprisal/parallel.hpp"

namespace surprisal {

enum class TailRegime { subgaussian, subexponential, polynomial };

inline std::string_view to_string(TailRegime r) {
  switch (r) {
    case TailRegime::subgaussian:
      return "subgaussian";
    case TailRegime::subexponential:
      return "subexponential";
    case TailRegime::polynomial:
      return "polynomial";
  }
  return "unknown";
}

struct MaxSurprisalStudy {
  DistributionModel model;
  std::size_t n = 1000;
  std::size_t reps = 2000;
  double entropy_ES = 0.0;
  double nu = 0.0;       // sub-Gaussian / sub-exponential variance proxy
  double b = 0.0;        // sub-exponential scale
  double C = 0.0;        // polynomial moment constant, E|S - ES|^p <= C^p
  double p_order = 2.0;  // polynomial moment order
};

// ---------------------------------------------------------------------------
// regime-constant oracles, all from one large sample of S

struct SurprisalMoments {
  double mean;
  std::vector<double> centered;  // S - mean
};

inline SurprisalMoments surprisal_oracle_sample(const DistributionModel& model, std::size_t draws, std::uint64_t seed) {
  auto s = detail::model_surprisals(model, sample(model, draws, seed));
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  for (auto& v : s) v -= mean;
  return {mean, std::move(s)};
}

/// log E exp(lambda X) from a sample, via log-sum-exp.
inline double empirical_log_mgf(std::span<const double> x, double lambda) {
  double top = -kInf;
  for (double v : x) top = std::max(top, lambda * v);
  double acc = 0.0;
  for (double v : x) acc += std::exp(lambda * v - top);
  return top + std::log(acc / static_cast<double>(x.size()));
}

/// Smallest nu^2 with log MGF(lambda) <= lambda^2 nu^2 / 2 over a lambda grid
/// of 64 log-spaced points of each sign in [lambda_min, lambda_max].
inline double variance_proxy(std::span<const double> centered, double lambda_min, double lambda_max) {
  double best = 0.0;
  const int points = 64;
  for (int i = 0; i < points; ++i) {
    const double lambda = lambda_min * std::pow(lambda_max / lambda_min, static_cast<double>(i) / (points - 1));
    for (double sign : {1.0, -1.0}) {
      const double l = sign * lambda;
      best = std::max(best, 2.0 * empirical_log_mgf(centered, l) / (l * l));
    }
  }
  return best;
}

struct RegimeConstants {
  double entropy_ES;
  double nu;
  double b;
  double C;
  double p_order;
};

/// Oracle constants for a regime from `draws` simulated surprisals.
///  subgaussian:    nu^2 = sup over |lambda| in [0.01, 20] of 2 log MGF / lambda^2
///  subexponential: exponential tail rate r of S - ES from mean excess over
///                  the 99.9% quantile; b = 4 / r, so the probed MGF range
///                  |lambda| <= r/4 has finite-variance estimates; nu^2 as above
///                  over |lambda| <= 1/b
///  polynomial:     C = (mean |S - ES|^p)^(1/p)
inline RegimeConstants estimate_regime_constants(const DistributionModel& model, TailRegime regime,
                                                 std::uint64_t seed, std::size_t draws = 1'000'000,
                                                 double p_order = 2.0) {
  const auto oracle = surprisal_oracle_sample(model, draws, seed);
  RegimeConstants out{oracle.mean, 0.0, 0.0, 0.0, p_order};
  const auto& x = oracle.centered;
  switch (regime) {
    case TailRegime::subgaussian:
      out.nu = std::sqrt(variance_proxy(x, 0.01, 20.0));
      break;
    case TailRegime::subexponential: {
      std::vector<double> sorted = x;
      std::sort(sorted.begin(), sorted.end());
      const double q = sorted[static_cast<std::size_t>(0.999 * static_cast<double>(sorted.size() - 1))];
      double excess = 0.0;
      std::size_t count = 0;
      for (auto it = std::upper_bound(sorted.begin(), sorted.end(), q); it != sorted.end(); ++it, ++count)
        excess += *it - q;
      detail::require(count > 0 && excess > 0.0, "estimate_regime_constants: surprisal tail is degenerate");
      const double rate = static_cast<double>(count) / excess;
      out.b = 4.0 / rate;
      out.nu = std::sqrt(variance_proxy(x, 1e-3 / out.b, 1.0 / out.b));
      break;
    }
    case TailRegime::polynomial: {
      detail::require(p_order >= 1.0, "estimate_regime_constants: p_order must be >= 1");
      double acc = 0.0;
      for (double v : x) acc += std::pow(std::fabs(v), p_order);
      out.C = std::pow(acc / static_cast<double>(x.size()), 1.0 / p_order);
      break;
    }
  }
  return out;
}

inline MaxSurprisalStudy make_study(DistributionModel model, std::size_t n, std::size_t reps, const RegimeConstants& k) {
  return {std::move(model), n, reps, k.entropy_ES, k.nu, k.b, k.C, k.p_order};
}

// ---------------------------------------------------------------------------
// simulation and bound checks

/// reps independent values of M_n - E[S].
inline std::vector<double> simulate_max_distribution(const MaxSurprisalStudy& study, std::uint64_t seed) {
  detail::require(study.reps >= 500, "simulate_max_distribution: reps must be at least 500");
  detail::require(study.n >= 1, "simulate_max_distribution: n must be positive");
  std::vector<double> out(study.reps);
  parallel_for(study.reps, [&](std::size_t r) {
    const auto data = sample(study.model, study.n, split_seed(seed, r));
    double top = -kInf;
    for (std::size_t i = 0; i < data.size(); ++i)
      top = std::max(top, -detail::log_density_unchecked(study.model, data[i]));
    out[r] = top - study.entropy_ES;
  });
  return out;
}

/// 1 - (1 - x)^n, accurate for small x.
inline double prob_any_of_n(double x, std::size_t n) {
  if (x >= 1.0) return 1.0;
  if (x <= 0.0) return 0.0;
  return -std::expm1(static_cast<double>(n) * std::log1p(-x));
}

/// Upper bound on the exceedance probability at s.
///  subgaussian:    Pr(M_n - ES >= s)   <= 1 - (1 - exp(-s^2 / (2 nu^2)))^n,  s > 0
///  subexponential: Pr(M_n - ES >= s)   <= 1 - (1 - exp(-s / (2b)))^n,        s > nu^2 / b
///  polynomial:     Pr(|M_n - ES| >= s) <= 1 - (1 - C^p / s^p)^n,             s > C
inline double tail_bound(const MaxSurprisalStudy& study, TailRegime regime, double s) {
  switch (regime) {
    case TailRegime::subgaussian:
      detail::require(study.nu > 0.0, "tail_bound: sub-Gaussian bound needs nu > 0");
      detail::require(s > 0.0, "tail_bound: sub-Gaussian bound needs s > 0");
      return prob_any_of_n(std::exp(-0.5 * s * s / (study.nu * study.nu)), study.n);
    case TailRegime::subexponential:
      detail::require(study.nu > 0.0 && study.b > 0.0, "tail_bound: sub-exponential bound needs nu > 0 and b > 0");
      detail::require(s > study.nu * study.nu / study.b, "tail_bound: sub-exponential bound needs s > nu^2/b");
      return prob_any_of_n(std::exp(-s / (2.0 * study.b)), study.n);
    case TailRegime::polynomial:
      detail::require(study.C > 0.0 && study.p_order >= 1.0, "tail_bound: polynomial bound needs C > 0 and p >= 1");
      detail::require(s > study.C, "tail_bound: polynomial bound needs s > C");
      return prob_any_of_n(std::pow(study.C / s, study.p_order), study.n);
  }
  throw ValidationError("tail_bound: unknown regime");
}

struct BoundCheckRow {
  double s;
  double empirical_prob;
  double bound;
  double slack;  // 3 binomial standard errors at the bound
  bool pass;
};

/// Compares empirical exceedance frequencies of the centered maxima with the
/// regime's bound at each grid point; passes when empirical <= bound + slack.
inline std::vector<BoundCheckRow> check_tail_bound(const MaxSurprisalStudy& study, TailRegime regime,
                                                   std::span<const double> s_grid,
                                                   std::span<const double> centered_maxima) {
  detail::require(!centered_maxima.empty(), "check_tail_bound: no simulated maxima");
  std::vector<BoundCheckRow> rows;
  const double reps = static_cast<double>(centered_maxima.size());
  for (double s : s_grid) {
    const double bound = tail_bound(study, regime, s);
    const bool two_sided = regime == TailRegime::polynomial;
    const auto hits = std::count_if(centered_maxima.begin(), centered_maxima.end(),
                                    [&](double m) { return (two_sided ? std::fabs(m) : m) >= s; });
    const double empirical = static_cast<double>(hits) / reps;
    const double clamped = std::clamp(bound, 0.0, 1.0);
    const double slack = 3.0 * std::sqrt(clamped * (1.0 - clamped) / reps);
    rows.push_back({s, empirical, bound, slack, empirical <= bound + slack});
  }
  return rows;
}

inline std::vector<BoundCheckRow> check_tail_bound(const MaxSurprisalStudy& study, TailRegime regime,
                                                   std::span<const double> s_grid, std::uint64_t seed) {
  const auto maxima = simulate_max_distribution(study, seed);
  return check_tail_bound(study, regime, s_grid, maxima);
}

/// Five points from the start of the bound's domain (or the typical size of
/// the maximum, whichever is larger) out to where the bound is negligible.
inline std::vector<double> default_bound_grid(const RegimeConstants& k, TailRegime regime, std::size_t n) {
  const double logn = std::log(static_cast<double>(n));
  double lo = 0.0, step = 0.0;
  switch (regime) {
    case TailRegime::subgaussian:
      lo = k.nu * std::sqrt(2.0 * logn);
      step = k.nu;
      break;
    case TailRegime::subexponential:
      lo = std::max(k.nu * k.nu / k.b, 2.0 * k.b * logn) * 1.0001;
      step = 2.0 * k.b;
      break;
    case TailRegime::polynomial:
      lo = k.C * std::pow(static_cast<double>(n), 1.0 / k.p_order);
      step = lo;
      break;
  }
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i) grid.push_back(lo + step * i);
  return grid;
}

inline bool all_pass(std::span<const BoundCheckRow> rows) {
  return std::all_of(rows.begin(), rows.end(), [](const BoundCheckRow& r) { return r.pass; });
}

inline void write_bound_csv(std::ostream& os, std::span<const BoundCheckRow> rows) {
  os << "s,empirical_prob,bound,pass\n";
  os.precision(10);
  for (const auto& r : rows) os << r.s << ',' << r.empirical_prob << ',' << r.bound << ',' << (r.pass ? "true" : "false") << '\n';
}

// ---------------------------------------------------------------------------
// Gumbel fit for sub-exponential maxima

inline double gumbel_cdf(double x, double location, double scale) {
  return std::exp(-std::exp(-(x - location) / scale));
}

struct GumbelParams {
  double location;
  double scale;
};

/// Method-of-moments Gumbel fit.
inline GumbelParams fit_gumbel_moments(std::span<const double> x) {
  constexpr double euler_gamma = 0.57721566490153286061;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  const double scale = std::sqrt(6.0 * var) / M_PI;
  return {mean - euler_gamma * scale, scale};
}

/// Kolmogorov distance between the sample ECDF and a Gumbel CDF.
inline double gumbel_ks_distance(std::span<const double> x, GumbelParams g) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double F = gumbel_cdf(sorted[i], g.location, g.scale);
    d = std::max({d, std::fabs(static_cast<double>(i + 1) / n - F), std::fabs(F - static_cast<double>(i) / n)});
  }
  return d;
}

}  // namespace surprisal
