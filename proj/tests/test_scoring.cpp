#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <utility>

#include "surprisal/model_spec.hpp"
#include "surprisal/parallel.hpp"
#include "surprisal/scoring.hpp"

using namespace surprisal;

TEST(Scoring, ComputeSurprisals) {
  const auto s = compute_surprisals(DistributionModel::normal(0, 1), Dataset::scalar({0.0}));
  EXPECT_NEAR(s.surprisals[0], 0.9189385332046727, 1e-15);
  EXPECT_NEAR(compute_surprisals(DistributionModel::gamma(2, 2), Dataset::scalar({1.0})).surprisals[0],
              0.6137056388801094, 1e-15);
  const auto b = compute_surprisals(DistributionModel::binomial(265, 0.148), Dataset::scalar({114.0}));
  EXPECT_GT(b.surprisals[0], 40.0);
  EXPECT_EQ(b.model_description, "binomial(trials=265,prob=0.148)");
  EXPECT_EQ(parse_model(b.model_description).describe(), b.model_description);
}

TEST(Scoring, SurprisalsMatchLogDensityBitForBit) {
  const auto m = DistributionModel::student_t(5, 1, 2);
  const auto data = sample(m, 500, 3);
  const auto s = compute_surprisals(m, data);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(s.surprisals[i], -log_density(m, data[i]));
}

TEST(Scoring, ComputeSurprisalsErrors) {
  EXPECT_THROW(compute_surprisals(DistributionModel::normal(0, 1), Dataset(2, {1.0, 2.0})), ValidationError);
  EXPECT_THROW(compute_surprisals(DistributionModel::normal(0, 1), Dataset::scalar({})), ValidationError);
}

TEST(Scoring, ZeroDensityGivesInfiniteSurprisalAndAlwaysFlags) {
  const auto m = DistributionModel::gamma(2, 1);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.1 + 0.05 * static_cast<double>(i);
  y[17] = -1.0;
  const auto s = compute_surprisals(m, Dataset::scalar(y));
  EXPECT_EQ(s.surprisals[17], kInf);
  for (auto method : {TailMethod::assumed, TailMethod::empirical}) {
    const auto est = estimate_tail(m, s.surprisals, method);
    EXPECT_EQ(est.probs[17], 0.0);
    const auto report = flag_anomalies(est, 1e-6);
    ASSERT_FALSE(report.flagged.empty());
    EXPECT_EQ(report.flagged.front(), 17u);
  }
}

TEST(Scoring, FlagAnomaliesIsStrict) {
  const TailEstimate est{{1.0, 0.005, 0.02, 0.01}, TailMethod::empirical, std::nullopt, ""};
  const auto r = flag_anomalies(est, 0.01);
  EXPECT_EQ(r.flagged, std::vector<std::size_t>{1});
  const TailEstimate ones{{1.0, 1.0}, TailMethod::empirical, std::nullopt, ""};
  EXPECT_TRUE(flag_anomalies(ones, 0.5).flagged.empty());
  EXPECT_THROW(flag_anomalies(est, 0.0), ValidationError);
  EXPECT_THROW(flag_anomalies(est, 1.5), ValidationError);
}

TEST(Scoring, GroupFilter) {
  AnomalyReport r;
  r.alpha = 0.01;
  r.flagged = {0, 1, 5, 6, 7};
  auto group = [](std::size_t i) { return i < 3 ? 0 : 1; };
  const auto three = group_filter(r, group, 3);
  EXPECT_EQ(three.flagged, (std::vector<std::size_t>{5, 6, 7}));
  ASSERT_TRUE(three.group_filter);
  EXPECT_EQ(three.group_filter->removed, 2u);
  EXPECT_EQ(group_filter(r, group, 1).flagged, r.flagged);
  EXPECT_THROW(group_filter(r, group, 0), ValidationError);

  auto pair_group = [](std::size_t i) { return std::make_pair(1914 + static_cast<int>(i % 2), std::string("male")); };
  EXPECT_EQ(group_filter(r, pair_group, 3).flagged, (std::vector<std::size_t>{1, 5, 7}));
}

TEST(Scoring, EstimatorsAreMonotoneInSurprisal) {
  const auto m = DistributionModel::normal(0, 1);
  const auto s = compute_surprisals(m, sample(m, 2000, 12)).surprisals;
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  for (auto method : {TailMethod::assumed, TailMethod::empirical, TailMethod::gpd}) {
    const auto est = estimate_tail(m, s, method);
    for (std::size_t k = 1; k < order.size(); ++k) {
      EXPECT_LE(est.probs[order[k]], est.probs[order[k - 1]]) << to_string(method);
      EXPECT_GE(est.probs[order[k]], 0.0);
      EXPECT_LE(est.probs[order[k]], 1.0);
    }
  }
}

TEST(Scoring, EmpiricalFlagCountUnderCorrectSpecification) {
  const auto m = DistributionModel::normal(0, 1);
  const std::size_t reps = 100, n = 10000;
  std::vector<double> rate(reps);
  parallel_for(reps, [&](std::size_t r) {
    const auto s = compute_surprisals(m, sample(m, n, split_seed(41, r))).surprisals;
    const auto flags = flag_anomalies(estimate_empirical(s), 0.01).flagged.size();
    EXPECT_LE(flags, n / 100);
    rate[r] = static_cast<double>(flags) / static_cast<double>(n);
  });
  const double mean = std::accumulate(rate.begin(), rate.end(), 0.0) / static_cast<double>(reps);
  EXPECT_GE(mean, 0.005);
  EXPECT_LE(mean, 0.015);
}

TEST(Scoring, TailMethodNames) {
  EXPECT_EQ(parse_tail_method("gpd"), TailMethod::gpd);
  EXPECT_EQ(to_string(TailMethod::assumed), "assumed");
  EXPECT_THROW(parse_tail_method("kde"), ValidationError);
}
