#pragma once

// Scoring of CSV tables against a textual model spec. Model parameters may
// name columns (resolved per row); `prob=fitted` in a binomial spec fits the
// spline-logistic smooth of the value column on the trials column first.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surprisal/assumed_tail.hpp"
#include "surprisal/conditional.hpp"
#include "surprisal/csv.hpp"
#include "surprisal/model_spec.hpp"
#include "surprisal/scoring.hpp"

namespace surprisal {

struct ScoreOptions {
  std::string model_spec;
  TailMethod method = TailMethod::empirical;
  double beta = kDefaultBeta;
  double alpha = 0.01;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;  // observation columns; chosen automatically when empty
};

struct ScoreResult {
  std::vector<std::string> value_columns;
  Dataset values;
  std::vector<double> surprisals;
  TailEstimate estimate;
  AnomalyReport report;
  std::optional<BinomialSmoothFit> smooth;
};

inline std::size_t spec_arity(const ModelSpec& spec) {
  if (spec.name != "product") return 1;
  std::size_t d = 0;
  for (const auto& arg : spec.args)
    if (const auto* m = std::get_if<std::shared_ptr<const ModelSpec>>(&arg.value)) d += spec_arity(**m);
  return d;
}

namespace detail {

inline bool is_output_column(const std::string& name) { return name == "surprisal" || name == "p" || name == "flagged"; }

inline std::vector<std::string> choose_value_columns(const CsvTable& table, const ModelSpec& spec,
                                                     const std::vector<std::string>& requested) {
  const std::size_t arity = spec_arity(spec);
  if (!requested.empty()) {
    if (requested.size() != arity)
      throw ValidationError("score: model takes " + std::to_string(arity) + " value column(s), " +
                            std::to_string(requested.size()) + " given");
    for (const auto& c : requested) table.column(c);
    return requested;
  }
  const auto refs = spec_references(spec);
  std::vector<std::string> out;
  for (const auto& h : table.header) {
    if (out.size() == arity) break;
    if (is_output_column(h) || std::find(refs.begin(), refs.end(), h) != refs.end()) continue;
    out.push_back(h);
  }
  if (out.size() != arity)
    throw ValidationError("score: input has fewer than " + std::to_string(arity) + " usable value column(s)");
  return out;
}

inline const std::string* binomial_trials_column(const ModelSpec& spec) {
  if (spec.name != "binomial" && spec.name != "binom") return nullptr;
  for (std::size_t i = 0; i < spec.args.size(); ++i) {
    const auto& arg = spec.args[i];
    const bool is_trials = arg.key ? *arg.key == "trials" : i == 0;
    if (is_trials) return std::get_if<std::string>(&arg.value);
  }
  return nullptr;
}

}  // namespace detail

inline ScoreResult score_table(const CsvTable& table, const ScoreOptions& options) {
  detail::require(options.alpha > 0.0 && options.alpha < 1.0, "alpha must lie in (0,1)");
  detail::require(table.size() > 0, "score: input has no data rows");
  const ModelSpec spec = parse_model_spec(options.model_spec);
  const auto refs = spec_references(spec);

  ScoreResult result;
  result.value_columns = detail::choose_value_columns(table, spec, options.columns);
  std::vector<std::size_t> value_idx;
  for (const auto& c : result.value_columns) value_idx.push_back(table.column(c));

  const std::size_t n = table.size();
  const std::size_t dim = value_idx.size();
  std::vector<double> flat(n * dim);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < dim; ++j) flat[r * dim + j] = table.number(r, value_idx[j]);
  result.values = Dataset(dim, std::move(flat));

  if (refs.empty()) {
    const auto model = build_model(spec);
    result.surprisals = compute_surprisals(model, result.values).surprisals;
    result.estimate = estimate_tail(model, result.surprisals, options.method, {options.beta, options.seed});
    result.report = flag_anomalies(result.estimate, options.alpha);
    return result;
  }

  const bool wants_fitted = std::find(refs.begin(), refs.end(), "fitted") != refs.end();
  std::optional<std::size_t> trials_idx;
  if (wants_fitted) {
    const std::string* trials = detail::binomial_trials_column(spec);
    if (!trials) throw ValidationError("score: 'fitted' is only valid as the prob of binomial(trials=<column>, ...)");
    trials_idx = table.column(*trials);
    std::vector<std::int64_t> innings(n), successes(n);
    for (std::size_t r = 0; r < n; ++r) {
      innings[r] = table.integer(r, *trials_idx);
      successes[r] = table.integer(r, value_idx[0]);
    }
    result.smooth = fit_binomial_smooth(innings, successes);
  }

  std::vector<DistributionModel> models;
  models.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const ColumnLookup lookup = [&](const std::string& name) -> std::optional<double> {
      if (name == "fitted" && result.smooth) return result.smooth->fitted_prob(table.number(r, *trials_idx));
      if (const auto c = table.find_column(name)) return table.number(r, *c);
      return std::nullopt;
    };
    try {
      models.push_back(build_model(spec, lookup));
    } catch (const ValidationError& e) {
      table.fail(r, e.what());
    }
  }

  result.surprisals.resize(n);
  for (std::size_t r = 0; r < n; ++r) result.surprisals[r] = -log_density(models[r], result.values[r]);

  if (options.method == TailMethod::assumed) {
    TailEstimate est{std::vector<double>(n), TailMethod::assumed, std::nullopt, "per-row models"};
    for (std::size_t r = 0; r < n; ++r)
      est.probs[r] = AssumedTail(models[r], split_seed(options.seed, r))(result.surprisals[r]);
    result.estimate = std::move(est);
  } else {
    result.estimate = options.method == TailMethod::empirical ? estimate_empirical(result.surprisals)
                                                              : estimate_gpd(result.surprisals, options.beta);
  }
  result.report = flag_anomalies(result.estimate, options.alpha);
  return result;
}

}  // namespace surprisal
