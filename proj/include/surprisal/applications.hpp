#pragma once

// End-to-end pipelines for the two applications:
//
// mortality: per (sex, age) series over years, Hampel surprisals of the
//   (log) rates, GPD tail probabilities pooled per sex, flags at alpha, then
//   only flags whose (year, sex) holds at least min_count flagged ages.
//
// cricket: binomial spline-logistic smooth of not-outs on innings, binomial
//   surprisals, GPD tail probabilities, batters ranked by p.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "surprisal/conditional.hpp"
#include "surprisal/csv.hpp"
#include "surprisal/gpd.hpp"
#include "surprisal/scoring.hpp"

namespace surprisal {

// ---------------------------------------------------------------------------
// mortality

struct MortalityRecord {
  int year;
  int age;
  std::string sex;
  double rate;
};

inline std::vector<MortalityRecord> mortality_from_csv(const CsvTable& table) {
  const auto year = table.column("year");
  const auto age = table.column("age");
  const auto sex = table.column("sex");
  const auto rate = table.column("mortality_rate");
  std::vector<MortalityRecord> out;
  out.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table.rows[r][sex].empty()) table.fail(r, "empty cell in column 'sex'");
    out.push_back({static_cast<int>(table.integer(r, year)), static_cast<int>(table.integer(r, age)),
                   table.rows[r][sex], table.number(r, rate)});
  }
  return out;
}

struct MortalityOptions {
  std::size_t half_window = 10;
  double alpha = 0.01;
  double beta = kDefaultBeta;
  std::size_t min_count = 3;
  bool log_rates = true;
};

struct MortalityRow {
  int year;
  int age;
  std::string sex;
  double rate;
  double surprisal;
  double p;
  bool flagged_raw;  // p < alpha
  bool flagged;      // after the (year, sex) group filter
};

struct MortalityResult {
  std::vector<MortalityRow> rows;  // ordered by sex, age, year
  AnomalyReport raw;
  AnomalyReport report;
  std::map<std::string, GpdFit> fits;  // per sex
};

inline MortalityResult run_mortality(const std::vector<MortalityRecord>& records, const MortalityOptions& options = {}) {
  detail::require(!records.empty(), "mortality: no records");
  detail::require(options.alpha > 0.0 && options.alpha < 1.0, "mortality: alpha must lie in (0,1)");

  std::set<int> years;
  std::map<std::pair<std::string, int>, std::map<int, double>> series;
  for (const auto& r : records) {
    years.insert(r.year);
    auto& s = series[{r.sex, r.age}];
    if (!s.emplace(r.year, r.rate).second) {
      throw ValidationError("mortality: duplicate record for sex=" + r.sex + " age=" + std::to_string(r.age) +
                            " year=" + std::to_string(r.year));
    }
    if (!std::isfinite(r.rate) || (options.log_rates && r.rate <= 0.0)) {
      throw ValidationError("mortality: rate for sex=" + r.sex + " age=" + std::to_string(r.age) + " year=" +
                            std::to_string(r.year) + " is not a positive finite number");
    }
  }

  std::vector<std::string> gaps;
  std::size_t gap_count = 0;
  for (const auto& [key, values] : series) {
    for (int y : years) {
      if (values.count(y)) continue;
      if (gaps.size() < 20) gaps.push_back(key.first + "/" + std::to_string(key.second) + "/" + std::to_string(y));
      ++gap_count;
    }
  }
  if (gap_count > 0) {
    std::ostringstream os;
    os << "mortality: " << gap_count << " missing (sex/age/year) cells:";
    for (const auto& g : gaps) os << ' ' << g;
    if (gap_count > gaps.size()) os << " ...";
    throw ValidationError(os.str());
  }

  MortalityResult result;
  std::map<std::string, std::vector<std::size_t>> rows_by_sex;
  for (const auto& [key, values] : series) {
    std::vector<double> y;
    y.reserve(values.size());
    for (const auto& [year, rate] : values) y.push_back(options.log_rates ? std::log(rate) : rate);
    const auto h = hampel_surprisals(y, HampelModel{options.half_window, std::nullopt});
    std::size_t t = 0;
    for (const auto& [year, rate] : values) {
      rows_by_sex[key.first].push_back(result.rows.size());
      result.rows.push_back({year, key.second, key.first, rate, h.sample.surprisals[t++], 1.0, false, false});
    }
  }

  TailEstimate pooled{std::vector<double>(result.rows.size(), 1.0), TailMethod::gpd, std::nullopt, "pooled per sex"};
  for (const auto& [sex, idx] : rows_by_sex) {
    std::vector<double> s(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) s[k] = result.rows[idx[k]].surprisal;
    const auto tail = gpd_tail_probs(s, options.beta);
    result.fits[sex] = tail.fit;
    for (std::size_t k = 0; k < idx.size(); ++k) pooled.probs[idx[k]] = tail.probs[k];
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i) result.rows[i].p = pooled.probs[i];

  result.raw = flag_anomalies(pooled, options.alpha);
  result.report = group_filter(
      result.raw, [&](std::size_t i) { return std::make_pair(result.rows[i].year, result.rows[i].sex); },
      options.min_count);
  for (std::size_t i : result.raw.flagged) result.rows[i].flagged_raw = true;
  for (std::size_t i : result.report.flagged) result.rows[i].flagged = true;
  return result;
}

/// Years with at least one retained flag for the given sex.
inline std::set<int> flagged_years(const MortalityResult& result, const std::string& sex) {
  std::set<int> out;
  for (std::size_t i : result.report.flagged)
    if (result.rows[i].sex == sex) out.insert(result.rows[i].year);
  return out;
}

// ---------------------------------------------------------------------------
// cricket

struct CricketRecord {
  std::string player;
  std::int64_t innings;
  std::int64_t notouts;
};

inline std::vector<CricketRecord> cricket_from_csv(const CsvTable& table) {
  const auto player = table.column("player");
  const auto innings = table.column("innings");
  const auto notouts = table.column("notouts");
  std::vector<CricketRecord> out;
  out.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    CricketRecord rec{table.rows[r][player], table.integer(r, innings), table.integer(r, notouts)};
    if (rec.innings < 0 || rec.notouts < 0 || rec.notouts > rec.innings)
      table.fail(r, "notouts must lie in [0, innings]");
    out.push_back(std::move(rec));
  }
  return out;
}

struct CricketOptions {
  double beta = kDefaultBeta;
  double alpha = 0.01;
};

struct CricketRow {
  std::string player;
  std::int64_t innings;
  std::int64_t notouts;
  double fitted_prob;
  double expected_notouts;
  double surprisal;
  double p;
  bool flagged;
};

struct CricketResult {
  std::int64_t total_innings = 0;
  std::int64_t total_notouts = 0;
  double pooled_proportion = 0.0;
  std::size_t skipped_zero_innings = 0;
  BinomialSmoothFit smooth;
  GpdFit gpd;
  std::vector<CricketRow> ranked;  // ascending p, ties by descending surprisal
  std::size_t flagged = 0;
};

/// Batters with zero innings carry no information and are skipped.
inline CricketResult run_cricket(const std::vector<CricketRecord>& records, const CricketOptions& options = {}) {
  CricketResult result;
  std::vector<const CricketRecord*> used;
  for (const auto& r : records) {
    if (r.innings == 0) {
      ++result.skipped_zero_innings;
      continue;
    }
    used.push_back(&r);
  }
  std::vector<std::int64_t> innings(used.size()), notouts(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    innings[i] = used[i]->innings;
    notouts[i] = used[i]->notouts;
  }
  result.total_innings = std::accumulate(innings.begin(), innings.end(), std::int64_t{0});
  result.total_notouts = std::accumulate(notouts.begin(), notouts.end(), std::int64_t{0});

  result.smooth = fit_binomial_smooth(innings, notouts);
  result.pooled_proportion = static_cast<double>(result.total_notouts) / static_cast<double>(result.total_innings);
  const auto sample = binomial_surprisals(result.smooth, innings, notouts);
  const auto estimate = estimate_gpd(sample.surprisals, options.beta);
  result.gpd = *estimate.gpd;
  const auto report = flag_anomalies(estimate, options.alpha);
  result.flagged = report.flagged.size();

  for (std::size_t i = 0; i < used.size(); ++i) {
    const double p_hat = result.smooth.fitted_prob(static_cast<double>(innings[i]));
    result.ranked.push_back({used[i]->player, innings[i], notouts[i], p_hat, p_hat * static_cast<double>(innings[i]),
                             sample.surprisals[i], estimate.probs[i], estimate.probs[i] < options.alpha});
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(), [](const CricketRow& a, const CricketRow& b) {
    if (a.p != b.p) return a.p < b.p;
    return a.surprisal > b.surprisal;
  });
  return result;
}

}  // namespace surprisal
