#pragma once

// Surprisals, tail-probability estimates and anomaly flags.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "surprisal/assumed_tail.hpp"
#include "surprisal/distributions.hpp"
#include "surprisal/empirical_tail.hpp"
#include "surprisal/error.hpp"
#include "surprisal/gpd.hpp"

namespace surprisal {

struct SurprisalSample {
  Dataset observations;
  std::vector<double> surprisals;
  std::string model_description;

  std::size_t size() const noexcept { return surprisals.size(); }
};

/// s_i = -log f(y_i). Zero density gives +inf, which is kept.
inline SurprisalSample compute_surprisals(const DistributionModel& model, const Dataset& data) {
  detail::require(!data.empty(), "compute_surprisals: data must be nonempty");
  if (data.dim() != model.arity()) {
    throw ValidationError("compute_surprisals: data has " + std::to_string(data.dim()) + " columns, model " +
                          model.describe() + " expects " + std::to_string(model.arity()));
  }
  return {data, detail::model_surprisals(model, data), model.describe()};
}

enum class TailMethod { assumed, empirical, gpd };

inline std::string_view to_string(TailMethod m) {
  switch (m) {
    case TailMethod::assumed:
      return "assumed";
    case TailMethod::empirical:
      return "empirical";
    case TailMethod::gpd:
      return "gpd";
  }
  return "unknown";
}

inline TailMethod parse_tail_method(std::string_view text) {
  if (text == "assumed") return TailMethod::assumed;
  if (text == "empirical") return TailMethod::empirical;
  if (text == "gpd") return TailMethod::gpd;
  throw ValidationError("unknown estimator '" + std::string(text) + "' (expected assumed, empirical or gpd)");
}

struct TailEstimate {
  std::vector<double> probs;
  TailMethod method = TailMethod::empirical;
  std::optional<GpdFit> gpd;  // set for the gpd method
  std::string note;           // assumed: model description; empirical: sample size
};

inline TailEstimate estimate_assumed(const AssumedTail& tail, std::span<const double> surprisals) {
  TailEstimate out{std::vector<double>(surprisals.size()), TailMethod::assumed, std::nullopt,
                   tail.model().describe()};
  for (std::size_t i = 0; i < surprisals.size(); ++i) out.probs[i] = tail(surprisals[i]);
  return out;
}

inline TailEstimate estimate_empirical(std::span<const double> surprisals) {
  return {empirical_tail_probs(surprisals), TailMethod::empirical, std::nullopt,
          "n=" + std::to_string(surprisals.size())};
}

inline TailEstimate estimate_gpd(std::span<const double> surprisals, double beta = kDefaultBeta) {
  auto result = gpd_tail_probs(surprisals, beta);
  return {std::move(result.probs), TailMethod::gpd, result.fit, "beta=" + std::to_string(beta)};
}

struct EstimateOptions {
  double beta = kDefaultBeta;
  std::uint64_t seed = 0;  // Monte-Carlo reference for assumed tails without closed form
};

inline TailEstimate estimate_tail(const DistributionModel& model, std::span<const double> surprisals,
                                  TailMethod method, const EstimateOptions& options = {}) {
  switch (method) {
    case TailMethod::assumed:
      return estimate_assumed(AssumedTail(model, options.seed), surprisals);
    case TailMethod::empirical:
      return estimate_empirical(surprisals);
    case TailMethod::gpd:
      return estimate_gpd(surprisals, options.beta);
  }
  throw ValidationError("estimate_tail: unknown method");
}

struct GroupFilterSummary {
  std::size_t min_count;
  std::size_t removed;
};

struct AnomalyReport {
  std::vector<std::size_t> flagged;  // ascending indices
  double alpha = 0.0;
  std::optional<GroupFilterSummary> group_filter;
};

/// Indices with probs[i] < alpha (strict).
inline AnomalyReport flag_anomalies(const TailEstimate& estimate, double alpha) {
  detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  AnomalyReport report;
  report.alpha = alpha;
  for (std::size_t i = 0; i < estimate.probs.size(); ++i)
    if (estimate.probs[i] < alpha) report.flagged.push_back(i);
  return report;
}

/// Keeps a flag only if its group holds at least min_count flags.
template <class GroupOf>
AnomalyReport group_filter(const AnomalyReport& report, GroupOf&& group_of, std::size_t min_count) {
  detail::require(min_count >= 1, "group_filter: min_count must be at least 1");
  using Key = std::decay_t<std::invoke_result_t<GroupOf&, std::size_t>>;
  std::map<Key, std::size_t> counts;
  for (std::size_t i : report.flagged) ++counts[group_of(i)];

  AnomalyReport out;
  out.alpha = report.alpha;
  for (std::size_t i : report.flagged)
    if (counts[group_of(i)] >= min_count) out.flagged.push_back(i);
  out.group_filter = GroupFilterSummary{min_count, report.flagged.size() - out.flagged.size()};
  return out;
}

}  // namespace surprisal
