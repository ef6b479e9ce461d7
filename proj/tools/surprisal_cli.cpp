// surprisal: command-line front end for surprisal-based anomaly detection.
//
// Exit codes: 0 success, 2 invalid input or arguments, 3 numerical failure.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "surprisal/applications.hpp"
#include "surprisal/conditional.hpp"
#include "surprisal/csv.hpp"
#include "surprisal/evt.hpp"
#include "surprisal/model_spec.hpp"
#include "surprisal/simulation.hpp"
#include "surprisal/table_scoring.hpp"

namespace {

using namespace surprisal;
using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

nlohmann::json json_field(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* b = std::get_if<bool>(&c)) return *b;
  const auto& s = std::get<std::string>(c);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && ec == std::errc() && end == s.data() + s.size() && std::isfinite(v)) return v;
  return s;
}

void write_table(std::ostream& os, const Table& t, const std::string& format) {
  if (format == "json") {
    auto arr = nlohmann::json::array();
    for (const auto& row : t.rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t j = 0; j < t.columns.size(); ++j) obj[t.columns[j]] = json_field(row[j]);
      arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << '\n';
    return;
  }
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << csv_field(row[j]);
    os << '\n';
  }
}

struct Common {
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string plot_data;
  double alpha = 0.01;
  double beta = kDefaultBeta;
  std::uint64_t seed = 1;
  std::size_t reps = 0;
  bool fast = false;
};

// Table output goes to --output (or stdout); human-readable summaries go to
// stdout when a file is written, else to stderr so stdout stays machine-readable.
class Sink {
 public:
  explicit Sink(const Common& c) : format_(c.format) {
    if (!c.output.empty()) {
      file_ = std::make_unique<std::ofstream>(c.output);
      if (!*file_) throw ValidationError("cannot write '" + c.output + "'");
    }
  }
  void table(const Table& t) { write_table(file_ ? *file_ : std::cout, t, format_); }
  std::ostream& log() { return file_ ? std::cout : std::cerr; }

 private:
  std::string format_;
  std::unique_ptr<std::ofstream> file_;
};

void write_plot_data(const std::string& path, const Table& t, const std::string& format) {
  if (path.empty()) return;
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write '" + path + "'");
  write_table(os, t, format);
}

std::size_t reps_or_default(const Common& c, std::size_t full, std::size_t fast = 100) {
  if (c.reps > 0) return c.reps;
  return c.fast ? fast : full;
}

void require_input(const Common& c) {
  if (c.input.empty()) throw ValidationError("--input is required");
}

// ---------------------------------------------------------------------------

int cmd_score(const Common& c, const std::string& model, const std::string& estimator, const std::vector<std::string>& columns) {
  require_input(c);
  if (model.empty()) throw ValidationError("--model is required");
  ScoreOptions opt{model, parse_tail_method(estimator), c.beta, c.alpha, c.seed, columns};
  const auto table = read_csv_file(c.input);
  const auto r = score_table(table, opt);

  // Input columns pass through verbatim; earlier score columns are replaced.
  Table out;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    const auto& h = table.header[j];
    if (h == "surprisal" || h == "p" || h == "flagged") continue;
    keep.push_back(j);
    out.columns.push_back(h);
  }
  for (const auto* name : {"surprisal", "p", "flagged"}) out.columns.emplace_back(name);
  std::vector<bool> flagged(r.surprisals.size(), false);
  for (std::size_t i : r.report.flagged) flagged[i] = true;
  for (std::size_t i = 0; i < r.surprisals.size(); ++i) {
    std::vector<Cell> row;
    for (std::size_t j : keep) row.emplace_back(table.rows[i][j]);
    row.emplace_back(r.surprisals[i]);
    row.emplace_back(r.estimate.probs[i]);
    row.emplace_back(static_cast<bool>(flagged[i]));
    out.rows.push_back(std::move(row));
  }
  Sink sink(c);
  sink.table(out);
  sink.log() << "flagged " << r.report.flagged.size() << " of " << r.surprisals.size() << " rows (estimator "
             << to_string(opt.method) << ", alpha " << c.alpha << ")\n";
  if (r.estimate.gpd) {
    const auto& g = *r.estimate.gpd;
    sink.log() << "gpd fit: u=" << g.threshold_u << " sigma=" << g.scale_sigma << " xi=" << g.shape_xi
               << " exceedances=" << g.n_exceed << '\n';
  }
  return 0;
}

int cmd_hampel(const Common& c, std::size_t window, const std::string& column, const std::string& estimator) {
  require_input(c);
  const auto table = read_csv_file(c.input);
  const auto col = column.empty() ? std::size_t{0} : table.column(column);
  std::vector<double> y(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) y[r] = table.number(r, col);

  const auto h = hampel_surprisals(y, HampelModel{window, std::nullopt});
  const auto method = parse_tail_method(estimator);
  const TailEstimate est = method == TailMethod::assumed ? hampel_assumed_tail(h)
                           : method == TailMethod::empirical ? estimate_empirical(h.sample.surprisals)
                                                              : estimate_gpd(h.sample.surprisals, c.beta);
  const auto report = flag_anomalies(est, c.alpha);
  std::vector<bool> flagged(y.size(), false);
  for (std::size_t i : report.flagged) flagged[i] = true;

  Table out{{"index", table.header[col], "median", "mad", "sigma", "surprisal", "p", "flagged"}, {}};
  for (std::size_t t = 0; t < y.size(); ++t) {
    out.rows.push_back({static_cast<std::int64_t>(t), y[t], h.medians[t], h.mads[t], h.sigmas[t], h.sample.surprisals[t],
                        est.probs[t], static_cast<bool>(flagged[t])});
  }
  Sink sink(c);
  sink.table(out);
  sink.log() << "flagged " << report.flagged.size() << " of " << y.size() << " points (h=" << window
             << ", alpha " << c.alpha << ", Hampel tau " << hampel_tau_from_alpha(c.alpha) << ")\n";
  return 0;
}

int cmd_cricket(const Common& c) {
  require_input(c);
  const auto records = cricket_from_csv(read_csv_file(c.input));
  const auto r = run_cricket(records, {c.beta, c.alpha});

  Table out{{"rank", "player", "innings", "notouts", "fitted_prob", "expected_notouts", "surprisal", "p", "flagged"}, {}};
  for (std::size_t i = 0; i < r.ranked.size(); ++i) {
    const auto& row = r.ranked[i];
    out.rows.push_back({static_cast<std::int64_t>(i + 1), row.player, row.innings, row.notouts, row.fitted_prob,
                        row.expected_notouts, row.surprisal, row.p, row.flagged});
  }
  Sink sink(c);
  sink.table(out);
  char pooled[64];
  std::snprintf(pooled, sizeof pooled, "%.3f", r.pooled_proportion);
  sink.log() << "pooled not-out proportion: " << r.total_notouts << " / " << r.total_innings << " = " << pooled << '\n';
  if (r.skipped_zero_innings) sink.log() << "skipped " << r.skipped_zero_innings << " batters with zero innings\n";
  sink.log() << "gpd fit: u=" << r.gpd.threshold_u << " sigma=" << r.gpd.scale_sigma << " xi=" << r.gpd.shape_xi
             << " exceedances=" << r.gpd.n_exceed << '\n';
  if (!r.ranked.empty()) {
    const auto& top = r.ranked.front();
    sink.log() << "top anomaly: " << top.player << " (" << top.notouts << " not-outs in " << top.innings
               << " innings, p=" << format_double(top.p) << ")\n";
  }
  sink.log() << "flagged " << r.flagged << " of " << r.ranked.size() << " batters at alpha " << c.alpha << '\n';
  return 0;
}

int cmd_mortality(const Common& c, std::size_t window, std::size_t min_group, bool raw_rates, bool all_rows) {
  require_input(c);
  const auto records = mortality_from_csv(read_csv_file(c.input));
  const auto r = run_mortality(records, {window, c.alpha, c.beta, min_group, !raw_rates});

  Table out{{"year", "age", "sex", "mortality_rate", "surprisal", "p", "flagged_raw", "flagged"}, {}};
  for (const auto& row : r.rows) {
    if (!all_rows && !row.flagged) continue;
    out.rows.push_back({static_cast<std::int64_t>(row.year), static_cast<std::int64_t>(row.age), row.sex, row.rate,
                        row.surprisal, row.p, row.flagged_raw, row.flagged});
  }
  if (!all_rows) {
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<std::string>(a[2]), std::get<std::int64_t>(a[0]), std::get<std::int64_t>(a[1])) <
             std::tie(std::get<std::string>(b[2]), std::get<std::int64_t>(b[0]), std::get<std::int64_t>(b[1]));
    });
  }
  Sink sink(c);
  sink.table(out);
  sink.log() << r.report.flagged.size() << " anomalies out of " << r.rows.size() << " observations ("
             << r.raw.flagged.size() << " before the min-group=" << min_group << " filter)\n";
  for (const auto& [sex, fit] : r.fits) {
    sink.log() << "gpd fit (" << sex << "): u=" << fit.threshold_u << " sigma=" << fit.scale_sigma
               << " xi=" << fit.shape_xi << " exceedances=" << fit.n_exceed << '\n';
    std::ostringstream years;
    for (int y : flagged_years(r, sex)) years << ' ' << y;
    sink.log() << "flagged years (" << sex << "):" << years.str() << '\n';
  }
  return 0;
}

int cmd_expt1(const Common& c, const std::string& truth) {
  if (truth != "normal" && truth != "t") throw ValidationError("--truth must be 'normal' or 't'");
  const auto config = univariate_config(truth == "normal", reps_or_default(c, 1000), c.seed);
  const auto r = run_expt_univariate(config);

  Table out{{"y", "distribution_used", "estimator", "p_estimate", "p_true"}, {}};
  for (const auto& row : r.grid) out.rows.push_back({row.y, row.distribution_used, row.estimator, row.p_estimate, row.p_true});
  Sink sink(c);
  sink.table(out);

  Table obs{{"y", "distribution_used", "estimator", "p_estimate", "p_true"}, {}};
  for (const auto& row : r.observations)
    obs.rows.push_back({row.y, row.distribution_used, row.estimator, row.p_estimate, row.p_true});
  write_plot_data(c.plot_data, obs, c.format);
  sink.log() << "expt1: truth " << config.true_model.name << ", n=" << config.n_grid.front() << ", reps=" << config.reps
             << '\n';
  return 0;
}

int cmd_expt2(const Common& c, std::vector<std::size_t> n_grid) {
  if (n_grid.empty()) n_grid = {200, 500, 1000, 2000, 5000, 10000};
  const auto config = false_rate_config(n_grid, reps_or_default(c, 1000), c.seed);
  auto cfg = config;
  cfg.alpha = c.alpha;
  cfg.estimators = {EstimatorSpec::empirical(), EstimatorSpec::gpd(c.beta)};
  const auto r = run_expt_false_rate(cfg);

  Table out{{"n", "assumed_model", "estimator", "mean_flag_rate", "ci_low", "ci_high", "mc_se"}, {}};
  for (const auto& row : r.rows) {
    out.rows.push_back({static_cast<std::int64_t>(row.n), row.assumed_model, row.estimator, row.mean_flag_rate,
                        row.ci_low, row.ci_high, row.mc_se});
  }
  Sink sink(c);
  sink.table(out);

  // wide layout: one column per (model, estimator) curve
  Table wide{{"n"}, {}};
  std::map<std::string, std::size_t> col_of;
  for (const auto& row : r.rows) {
    const std::string key = row.assumed_model + ":" + row.estimator;
    if (col_of.emplace(key, wide.columns.size()).second) wide.columns.push_back(key);
  }
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    std::vector<Cell> line(wide.columns.size(), Cell{std::numeric_limits<double>::quiet_NaN()});
    line[0] = static_cast<std::int64_t>(n_grid[k]);
    for (const auto& row : r.rows)
      if (row.n == n_grid[k]) line[col_of[row.assumed_model + ":" + row.estimator]] = row.mean_flag_rate;
    wide.rows.push_back(std::move(line));
  }
  write_plot_data(c.plot_data, wide, c.format);

  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    sink.log() << "n=" << n_grid[k] << ": empirical flag sets identical (Gamma vs Normal) in "
               << r.identical_empirical_sets[k] << " of " << cfg.reps << " reps; counts identical in "
               << r.identical_empirical_counts[k] << '\n';
  }
  return 0;
}

int cmd_evt_check(const Common& c, const std::string& model_text, const std::string& regime_text, std::size_t n,
                  std::vector<double> s_grid, std::size_t draws, double p_order, double nu_scale) {
  const auto model = parse_model(model_text);
  TailRegime regime;
  if (regime_text == "subgaussian") regime = TailRegime::subgaussian;
  else if (regime_text == "subexponential") regime = TailRegime::subexponential;
  else if (regime_text == "polynomial") regime = TailRegime::polynomial;
  else throw ValidationError("--regime must be subgaussian, subexponential or polynomial");

  auto k = estimate_regime_constants(model, regime, split_seed(c.seed, 0), draws, p_order);
  k.nu *= nu_scale;
  auto study = make_study(model, n, reps_or_default(c, 2000, 500), k);
  if (s_grid.empty()) s_grid = default_bound_grid(k, regime, n);
  const auto rows = check_tail_bound(study, regime, s_grid, split_seed(c.seed, 1));

  Table out{{"s", "empirical_prob", "bound", "pass"}, {}};
  for (const auto& r : rows) out.rows.push_back({r.s, r.empirical_prob, r.bound, r.pass});
  Sink sink(c);
  sink.table(out);
  sink.log() << "regime " << to_string(regime) << ": E[S]=" << k.entropy_ES << " nu=" << k.nu << " b=" << k.b
             << " C=" << k.C << " p=" << k.p_order << "; " << (all_pass(rows) ? "all grid points pass" : "bound VIOLATED")
             << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surprisal-based anomaly detection"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input,-i", common.input, "Input CSV file");
    sub->add_option("--output,-o", common.output, "Output file (default: stdout)");
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--alpha", common.alpha, "Anomaly threshold on p");
    sub->add_option("--beta", common.beta, "GPD tail fraction");
    sub->add_option("--seed", common.seed, "Master random seed");
  };
  auto add_reps = [&](CLI::App* sub) {
    sub->add_option("--reps", common.reps, "Monte-Carlo replications");
    sub->add_flag("--fast", common.fast, "Use a reduced replication count (100; 500 for evt-check)");
    sub->add_option("--plot-data", common.plot_data, "Also write figure-shaped data to this file");
  };

  std::string model, estimator = "empirical", column, truth = "normal", regime = "subgaussian";
  std::vector<std::string> columns;
  std::size_t window = 10, min_group = 3, evt_n = 1000, draws = 1'000'000;
  std::vector<std::size_t> n_grid;
  std::vector<double> s_grid;
  double p_order = 2.0, nu_scale = 1.0;
  bool raw_rates = false, all_rows = false;

  auto* score = app.add_subcommand("score", "Score each row of a CSV under a model");
  add_common(score);
  score->add_option("--model,-m", model, "Model spec, e.g. normal(0,1) or binomial(trials=innings,prob=fitted)");
  score->add_option("--estimator,-e", estimator, "assumed | empirical | gpd");
  score->add_option("--columns", columns, "Observation columns")->delimiter(',');

  auto* hampel = app.add_subcommand("hampel", "Hampel-filter surprisals of a time series");
  add_common(hampel);
  hampel->add_option("--window", window, "Half-window h");
  hampel->add_option("--column", column, "Series column (default: first)");
  hampel->add_option("--estimator,-e", estimator, "assumed | empirical | gpd")->default_str("assumed");

  auto* cricket = app.add_subcommand("cricket", "Rank batters by anomalous not-out counts");
  add_common(cricket);

  auto* mortality = app.add_subcommand("mortality", "Anomalous mortality rates by year, age and sex");
  add_common(mortality);
  mortality->add_option("--window", window, "Hampel half-window h");
  mortality->add_option("--min-group", min_group, "Minimum flagged ages per (year, sex)");
  mortality->add_flag("--raw-rates", raw_rates, "Do not log-transform the rates");
  mortality->add_flag("--all", all_rows, "Write every row, not only retained anomalies");

  auto* expt1 = app.add_subcommand("expt1", "Normal / t(4) cross-misspecification tail curves");
  add_common(expt1);
  add_reps(expt1);
  expt1->add_option("--truth", truth, "normal | t");

  auto* expt2 = app.add_subcommand("expt2", "False anomaly rate against n for bivariate Gamma data");
  add_common(expt2);
  add_reps(expt2);
  expt2->add_option("--n-grid", n_grid, "Sample sizes")->delimiter(',');

  auto* evt = app.add_subcommand("evt-check", "Monte-Carlo check of a tail bound on the maximum surprisal");
  add_common(evt);
  add_reps(evt);
  evt->add_option("--model,-m", model, "Model spec")->required();
  evt->add_option("--regime", regime, "subgaussian | subexponential | polynomial");
  evt->add_option("--n", evt_n, "Observations per replication");
  evt->add_option("--s-grid", s_grid, "Evaluation points")->delimiter(',');
  evt->add_option("--draws", draws, "Oracle draws for the regime constants");
  evt->add_option("--p-order", p_order, "Moment order for the polynomial regime");
  evt->add_option("--nu-scale", nu_scale, "Multiply the estimated nu (negative controls)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  bool hampel_estimator_given = hampel->count("--estimator") > 0;
  try {
    if (!(common.alpha > 0.0 && common.alpha < 1.0)) throw ValidationError("--alpha must lie in (0,1)");
    if (!(common.beta > 0.0 && common.beta < 1.0)) throw ValidationError("--beta must lie in (0,1)");
    if (*score) return cmd_score(common, model, estimator, columns);
    if (*hampel) return cmd_hampel(common, window, column, hampel_estimator_given ? estimator : "assumed");
    if (*cricket) return cmd_cricket(common);
    if (*mortality) return cmd_mortality(common, window, min_group, raw_rates, all_rows);
    if (*expt1) return cmd_expt1(common, truth);
    if (*expt2) return cmd_expt2(common, n_grid);
    if (*evt) return cmd_evt_check(common, model, regime, evt_n, s_grid, draws, p_order, nu_scale);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << '\n';
    return 3;
  }
  return 0;
}
