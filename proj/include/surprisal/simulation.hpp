#pragma once

// Misspecification experiments.
//
// Univariate: data from a true model (N(0,1) or t(4)); surprisals under each
// assumed model; tail probabilities at grid points |y| in [2.5, 4.5] from the
// assumed, empirical and GPD (fixed exceedance count) estimators.
//
// False rate: data from a product of Gamma(2,2); surprisals under several
// assumed models; flagged fraction at alpha for the empirical and GPD
// estimators across sample sizes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "surprisal/assumed_tail.hpp"
#include "surprisal/distributions.hpp"
#include "surprisal/empirical_tail.hpp"
#include "surprisal/gpd.hpp"
#include "surprisal/parallel.hpp"
#include "surprisal/scoring.hpp"

namespace surprisal {

struct EstimatorSpec {
  TailMethod method = TailMethod::empirical;
  double beta = kDefaultBeta;              // gpd only
  std::optional<std::size_t> exceedances;  // gpd: fixed count overrides beta

  static EstimatorSpec assumed() { return {TailMethod::assumed, kDefaultBeta, std::nullopt}; }
  static EstimatorSpec empirical() { return {TailMethod::empirical, kDefaultBeta, std::nullopt}; }
  static EstimatorSpec gpd(double beta) { return {TailMethod::gpd, beta, std::nullopt}; }
  static EstimatorSpec gpd_exceedances(std::size_t k) { return {TailMethod::gpd, kDefaultBeta, k}; }

  std::string label() const {
    if (method != TailMethod::gpd) return std::string(to_string(method));
    if (exceedances) return "gpd(k=" + std::to_string(*exceedances) + ")";
    std::ostringstream os;
    os << "gpd(beta=" << beta << ")";
    return os.str();
  }
};

struct NamedModel {
  std::string name;
  DistributionModel model;
};

struct ExperimentConfig {
  NamedModel true_model;
  std::vector<NamedModel> assumed_models;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::size_t> n_grid;
  double alpha = 0.01;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
};

// ---------------------------------------------------------------------------
// univariate experiment

struct UnivariateRow {
  double y;
  std::string distribution_used;
  std::string estimator;
  double p_estimate;  // mean over replications
  double p_true;
};

struct ObservationRow {
  double y;
  std::string distribution_used;
  std::string estimator;
  double p_estimate;
  double p_true;
};

struct UnivariateResult {
  std::vector<UnivariateRow> grid;
  std::vector<ObservationRow> observations;  // first replication, |y| beyond the display threshold
};

inline std::vector<double> default_y_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(2.5 + 0.1 * i);
  return grid;
}

/// Two-sided tail Pr(|Y| >= |y|) under a symmetric scalar model centered at 0.
inline double symmetric_true_tail(const DistributionModel& truth, double y) {
  const double a = std::fabs(y);
  if (const auto* m = truth.as<Normal>()) return 2.0 * normal_ccdf(a / m->sigma);
  if (const auto* m = truth.as<StudentT>()) return 2.0 * student_t_ccdf(a / m->scale, m->nu);
  throw ValidationError("univariate experiment: truth must be a Normal or t model centered at 0");
}

namespace detail {

struct ScalarTailEstimator {
  TailMethod method;
  const AssumedTail* assumed = nullptr;
  std::optional<EcdfTail> empirical;
  std::optional<GpdFit> gpd;

  double operator()(double s) const {
    switch (method) {
      case TailMethod::assumed:
        return (*assumed)(s);
      case TailMethod::empirical:
        return s == kInf ? 0.0 : empirical->tail_prob(s);
      case TailMethod::gpd:
        return gpd_tail_prob(*gpd, s);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

inline ScalarTailEstimator build_estimator(const EstimatorSpec& spec, const AssumedTail& assumed,
                                           const std::vector<double>& surprisals) {
  ScalarTailEstimator e{spec.method, &assumed, std::nullopt, std::nullopt};
  if (spec.method == TailMethod::empirical) e.empirical.emplace(surprisals);
  if (spec.method == TailMethod::gpd) {
    const double beta = spec.exceedances
                            ? static_cast<double>(*spec.exceedances) / static_cast<double>(surprisals.size())
                            : spec.beta;
    e.gpd = fit_gpd_tail(surprisals, beta);
  }
  return e;
}

}  // namespace detail

inline UnivariateResult run_expt_univariate(const ExperimentConfig& config, std::vector<double> y_grid = default_y_grid(),
                                            double display_threshold = 2.5) {
  detail::require(config.reps >= 1, "run_expt_univariate: reps must be at least 1");
  detail::require(!config.n_grid.empty(), "run_expt_univariate: n_grid must name the sample size");
  const std::size_t n = config.n_grid.front();
  for (const auto& a : config.assumed_models)
    detail::require(a.model.arity() == 1, "run_expt_univariate: assumed models must be scalar");

  std::vector<AssumedTail> assumed;
  for (const auto& a : config.assumed_models) assumed.emplace_back(a.model);

  const std::size_t cells = config.assumed_models.size() * config.estimators.size();
  // sums[rep][cell][grid]
  std::vector<std::vector<double>> sums(config.reps, std::vector<double>(cells * y_grid.size(), 0.0));
  UnivariateResult result;

  parallel_for(config.reps, [&](std::size_t r) {
    const auto data = sample(config.true_model.model, n, split_seed(config.seed, r));
    for (std::size_t a = 0; a < assumed.size(); ++a) {
      const auto surprisals = detail::model_surprisals(assumed[a].model(), data);
      for (std::size_t e = 0; e < config.estimators.size(); ++e) {
        const auto est = detail::build_estimator(config.estimators[e], assumed[a], surprisals);
        const std::size_t cell = a * config.estimators.size() + e;
        for (std::size_t g = 0; g < y_grid.size(); ++g)
          sums[r][cell * y_grid.size() + g] = est(-log_density(assumed[a].model(), y_grid[g]));
        if (r == 0) {
          for (std::size_t i = 0; i < data.size(); ++i) {
            const double y = data[i][0];
            if (std::fabs(y) <= display_threshold) continue;
            result.observations.push_back({y, config.assumed_models[a].name, config.estimators[e].label(),
                                           est(surprisals[i]), symmetric_true_tail(config.true_model.model, y)});
          }
        }
      }
    }
  });

  for (std::size_t a = 0; a < assumed.size(); ++a) {
    for (std::size_t e = 0; e < config.estimators.size(); ++e) {
      const std::size_t cell = a * config.estimators.size() + e;
      for (std::size_t g = 0; g < y_grid.size(); ++g) {
        double total = 0.0;
        for (std::size_t r = 0; r < config.reps; ++r) total += sums[r][cell * y_grid.size() + g];
        result.grid.push_back({y_grid[g], config.assumed_models[a].name, config.estimators[e].label(),
                               total / static_cast<double>(config.reps),
                               symmetric_true_tail(config.true_model.model, y_grid[g])});
      }
    }
  }
  return result;
}

inline ExperimentConfig univariate_config(bool truth_is_normal, std::size_t reps = 1, std::uint64_t seed = 1) {
  const NamedModel normal{"N(0,1)", DistributionModel::normal(0.0, 1.0)};
  const NamedModel t4{"t(4)", DistributionModel::student_t(4.0)};
  ExperimentConfig c{truth_is_normal ? normal : t4,
                     {normal, t4},
                     {EstimatorSpec::assumed(), EstimatorSpec::empirical(), EstimatorSpec::gpd_exceedances(100)},
                     {1000},
                     0.01,
                     reps,
                     seed};
  return c;
}

// ---------------------------------------------------------------------------
// false anomaly rate experiment

struct FalseRateRow {
  std::size_t n;
  std::string assumed_model;
  std::string estimator;
  double mean_flag_rate;  // NaN when the estimator could not run at this n
  double ci_low;
  double ci_high;
  double mc_se;  // standard error of the mean over replications
};

struct FalseRateResult {
  std::vector<FalseRateRow> rows;
  // Per n: replications where the empirical flag sets (and counts) of the first
  // two assumed models coincide.
  std::vector<std::size_t> identical_empirical_sets;
  std::vector<std::size_t> identical_empirical_counts;
};

inline FalseRateResult run_expt_false_rate(const ExperimentConfig& config) {
  detail::require(config.reps >= 1, "run_expt_false_rate: reps must be at least 1");
  detail::require(config.alpha > 0.0 && config.alpha < 1.0, "run_expt_false_rate: alpha must lie in (0,1)");
  const std::size_t arity = config.true_model.model.arity();
  for (const auto& a : config.assumed_models)
    detail::require(a.model.arity() == arity, "run_expt_false_rate: assumed model arity differs from the truth");

  const std::size_t models = config.assumed_models.size();
  const std::size_t ests = config.estimators.size();
  std::vector<AssumedTail> assumed;
  for (std::size_t a = 0; a < models; ++a) assumed.emplace_back(config.assumed_models[a].model, split_seed(config.seed, 1'000'000 + a));

  FalseRateResult result;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::size_t n = config.n_grid[ni];
    std::vector<double> rates(config.reps * models * ests, nan);
    std::vector<char> same_set(config.reps, 0), same_count(config.reps, 0);

    parallel_for(config.reps, [&](std::size_t r) {
      const auto data = sample(config.true_model.model, n, split_seed(split_seed(config.seed, ni), r));
      std::vector<std::vector<std::size_t>> empirical_flags;
      for (std::size_t a = 0; a < models; ++a) {
        const auto surprisals = detail::model_surprisals(assumed[a].model(), data);
        for (std::size_t e = 0; e < ests; ++e) {
          const auto& spec = config.estimators[e];
          TailEstimate estimate;
          try {
            if (spec.method == TailMethod::gpd) {
              const double beta = spec.exceedances ? static_cast<double>(*spec.exceedances) / static_cast<double>(n) : spec.beta;
              estimate = estimate_gpd(surprisals, beta);
            } else if (spec.method == TailMethod::empirical) {
              estimate = estimate_empirical(surprisals);
            } else {
              estimate = estimate_assumed(assumed[a], surprisals);
            }
          } catch (const ValidationError&) {
            continue;  // too few exceedances at this n
          }
          const auto report = flag_anomalies(estimate, config.alpha);
          rates[(r * models + a) * ests + e] = static_cast<double>(report.flagged.size()) / static_cast<double>(n);
          if (spec.method == TailMethod::empirical && a < 2) empirical_flags.push_back(report.flagged);
        }
      }
      if (empirical_flags.size() == 2) {
        same_set[r] = empirical_flags[0] == empirical_flags[1];
        same_count[r] = empirical_flags[0].size() == empirical_flags[1].size();
      }
    });

    for (std::size_t a = 0; a < models; ++a) {
      for (std::size_t e = 0; e < ests; ++e) {
        double sum = 0.0, sumsq = 0.0;
        std::size_t used = 0;
        for (std::size_t r = 0; r < config.reps; ++r) {
          const double v = rates[(r * models + a) * ests + e];
          if (std::isnan(v)) continue;
          sum += v;
          sumsq += v * v;
          ++used;
        }
        FalseRateRow row{n, config.assumed_models[a].name, config.estimators[e].label(), nan, nan, nan, nan};
        if (used > 0) {
          const double mean = sum / static_cast<double>(used);
          const double var = used > 1 ? std::max(0.0, (sumsq - sum * mean) / static_cast<double>(used - 1)) : 0.0;
          const double trials = static_cast<double>(used) * static_cast<double>(n);
          const double half = 1.96 * std::sqrt(mean * (1.0 - mean) / trials);
          row.mean_flag_rate = mean;
          row.ci_low = std::max(0.0, mean - half);
          row.ci_high = std::min(1.0, mean + half);
          row.mc_se = std::sqrt(var / static_cast<double>(used));
        }
        result.rows.push_back(row);
      }
    }
    result.identical_empirical_sets.push_back(static_cast<std::size_t>(std::count(same_set.begin(), same_set.end(), 1)));
    result.identical_empirical_counts.push_back(static_cast<std::size_t>(std::count(same_count.begin(), same_count.end(), 1)));
  }
  return result;
}

/// Truth Gamma(2,2) x Gamma(2,2); assumed truth, N((1,1), 0.5 I) and a
/// product of t(4) with the same location and scale.
inline ExperimentConfig false_rate_config(std::vector<std::size_t> n_grid, std::size_t reps, std::uint64_t seed = 1) {
  const auto gamma22 = DistributionModel::gamma(2.0, 2.0);
  const double sd = std::sqrt(0.5);
  const NamedModel truth{"Gamma", DistributionModel::product({gamma22, gamma22})};
  const NamedModel normal{"Normal", DistributionModel::product({DistributionModel::normal(1.0, sd), DistributionModel::normal(1.0, sd)})};
  const NamedModel t4{"StudentT",
                      DistributionModel::product({DistributionModel::student_t(4.0, 1.0, sd), DistributionModel::student_t(4.0, 1.0, sd)})};
  return {truth, {truth, normal, t4}, {EstimatorSpec::empirical(), EstimatorSpec::gpd(kDefaultBeta)}, std::move(n_grid), 0.01, reps, seed};
}

inline const FalseRateRow* find_row(const FalseRateResult& r, std::size_t n, std::string_view model, std::string_view estimator) {
  for (const auto& row : r.rows)
    if (row.n == n && row.assumed_model == model && row.estimator == estimator) return &row;
  return nullptr;
}

inline void write_univariate_csv(std::ostream& os, const UnivariateResult& r) {
  os << "y,distribution_used,estimator,p_estimate,p_true\n";
  os.precision(10);
  for (const auto& row : r.grid)
    os << row.y << ',' << row.distribution_used << ',' << row.estimator << ',' << row.p_estimate << ',' << row.p_true << '\n';
}

inline void write_observations_csv(std::ostream& os, const UnivariateResult& r) {
  os << "y,distribution_used,estimator,p_estimate,p_true\n";
  os.precision(10);
  for (const auto& row : r.observations)
    os << row.y << ',' << row.distribution_used << ',' << row.estimator << ',' << row.p_estimate << ',' << row.p_true << '\n';
}

inline void write_false_rate_csv(std::ostream& os, const FalseRateResult& r) {
  os << "n,assumed_model,estimator,mean_flag_rate,ci_low,ci_high,mc_se\n";
  os.precision(10);
  for (const auto& row : r.rows)
    os << row.n << ',' << row.assumed_model << ',' << row.estimator << ',' << row.mean_flag_rate << ',' << row.ci_low
       << ',' << row.ci_high << ',' << row.mc_se << '\n';
}

}  // namespace surprisal
