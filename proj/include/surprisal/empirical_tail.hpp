#pragma once

// Empirical surprisal tail probabilities and DKW uniform confidence bands.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "surprisal/distributions.hpp"
#include "surprisal/error.hpp"
#include "surprisal/parallel.hpp"

namespace surprisal {

/// Sorted copy of a surprisal sample. Queries are O(log n) and read-only.
class EcdfTail {
 public:
  explicit EcdfTail(std::span<const double> surprisals) : sorted_(surprisals.begin(), surprisals.end()) {
    detail::require(!sorted_.empty(), "EcdfTail: sample must be nonempty");
    for (double s : sorted_) detail::require(!std::isnan(s), "EcdfTail: surprisal is NaN");
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted() const noexcept { return sorted_; }

  /// Proportion of surprisals at least as large as s. Ties count inclusively,
  /// so an observed value counts itself; s above the maximum gives 0.
  double tail_prob(double s) const {
    const auto first_ge = std::lower_bound(sorted_.begin(), sorted_.end(), s);
    return static_cast<double>(sorted_.end() - first_ge) / static_cast<double>(sorted_.size());
  }

  /// Empirical CDF, proportion of surprisals <= s.
  double cdf(double s) const {
    const auto first_gt = std::upper_bound(sorted_.begin(), sorted_.end(), s);
    return static_cast<double>(first_gt - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  /// Proportion of surprisals strictly below s.
  double cdf_left(double s) const {
    const auto first_ge = std::lower_bound(sorted_.begin(), sorted_.end(), s);
    return static_cast<double>(first_ge - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
};

/// Per-observation empirical tail probabilities. Infinite surprisals get 0.
inline std::vector<double> empirical_tail_probs(std::span<const double> surprisals) {
  const EcdfTail tail(surprisals);
  std::vector<double> probs(surprisals.size());
  for (std::size_t i = 0; i < surprisals.size(); ++i)
    probs[i] = surprisals[i] == kInf ? 0.0 : tail.tail_prob(surprisals[i]);
  return probs;
}

/// Half-width of the DKW uniform band: sqrt(log(2/alpha) / (2n)).
inline double dkw_epsilon(std::size_t n, double alpha) {
  detail::require(n >= 1, "dkw_epsilon: n must be at least 1");
  detail::require(alpha > 0.0 && alpha < 1.0, "dkw_epsilon: alpha must lie in (0,1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

struct DkwBand {
  double epsilon;
  double alpha;
  std::size_t n;

  double lower(double ecdf_value) const { return std::max(0.0, ecdf_value - epsilon); }
  double upper(double ecdf_value) const { return std::min(1.0, ecdf_value + epsilon); }
};

inline DkwBand dkw_band(std::size_t n, double alpha) { return {dkw_epsilon(n, alpha), alpha, n}; }

/// sup_s |sample ECDF(s) - reference ECDF(s)|, evaluated on both sides of
/// every sample jump (the sample ECDF is flat in between, the reference monotone).
inline double sup_ecdf_distance(const EcdfTail& sample, const EcdfTail& reference) {
  const auto& xs = sample.sorted();
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    worst = std::max(worst, std::fabs(below - reference.cdf_left(xs[i])));
    worst = std::max(worst, std::fabs(at - reference.cdf(xs[i])));
    i = j;
  }
  return worst;
}

namespace detail {

inline std::vector<double> model_surprisals(const DistributionModel& model, const Dataset& data) {
  std::vector<double> s(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) s[i] = -detail::log_density_unchecked(model, data[i]);
  return s;
}

}  // namespace detail

struct CoverageResult {
  double coverage;
  double epsilon;
  std::size_t reps;
  std::vector<double> sup_deviations;
};

/// Fraction of replications whose sample surprisal ECDF stays within the DKW
/// band of the true surprisal CDF. The truth is approximated by the ECDF of
/// `oracle_draws` surprisals from the same model.
inline CoverageResult band_coverage_check(const DistributionModel& model, std::size_t n, double alpha,
                                          std::size_t reps, std::uint64_t seed,
                                          std::size_t oracle_draws = 1'000'000) {
  detail::require(reps >= 100, "band_coverage_check: reps must be at least 100");
  const double epsilon = dkw_epsilon(n, alpha);
  const EcdfTail oracle(detail::model_surprisals(model, sample(model, oracle_draws, split_seed(seed, reps))));

  std::vector<double> deviations(reps);
  parallel_for(reps, [&](std::size_t r) {
    const EcdfTail fitted(detail::model_surprisals(model, sample(model, n, split_seed(seed, r))));
    deviations[r] = sup_ecdf_distance(fitted, oracle);
  });
  const auto covered = std::count_if(deviations.begin(), deviations.end(), [&](double d) { return d <= epsilon; });
  return {static_cast<double>(covered) / static_cast<double>(reps), epsilon, reps, std::move(deviations)};
}

}  // namespace surprisal
