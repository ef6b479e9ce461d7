#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>

#include "surprisal/evt.hpp"

using namespace surprisal;

TEST(Evt, ProbAnyOfN) {
  EXPECT_EQ(prob_any_of_n(0.0, 100), 0.0);
  EXPECT_EQ(prob_any_of_n(1.0, 100), 1.0);
  EXPECT_NEAR(prob_any_of_n(0.1, 2), 0.19, 1e-15);
  EXPECT_NEAR(prob_any_of_n(1e-12, 1000), 1e-9, 1e-18);
}

TEST(Evt, TailBoundDomains) {
  MaxSurprisalStudy study{DistributionModel::normal(0, 1), 100, 500, 1.4, 1.0, 1.0, 2.0, 2.0};
  EXPECT_NO_THROW(tail_bound(study, TailRegime::subgaussian, 0.5));
  EXPECT_THROW(tail_bound(study, TailRegime::subgaussian, 0.0), ValidationError);
  EXPECT_THROW(tail_bound(study, TailRegime::subexponential, 1.0), ValidationError);  // needs s > nu^2/b = 1
  EXPECT_NO_THROW(tail_bound(study, TailRegime::subexponential, 1.5));
  EXPECT_THROW(tail_bound(study, TailRegime::polynomial, 2.0), ValidationError);  // needs s > C
  EXPECT_NEAR(tail_bound(study, TailRegime::polynomial, 4.0), prob_any_of_n(0.25, 100), 1e-15);

  MaxSurprisalStudy missing{DistributionModel::normal(0, 1), 100, 500, 1.4, 0.0, 0.0, 0.0, 2.0};
  for (auto regime : {TailRegime::subgaussian, TailRegime::subexponential, TailRegime::polynomial})
    EXPECT_THROW(tail_bound(missing, regime, 5.0), ValidationError);
}

TEST(Evt, CheckTailBoundComparesWithSlack) {
  MaxSurprisalStudy study{DistributionModel::normal(0, 1), 10, 500, 0.0, 1.0, 0.0, 0.0, 2.0};
  // 1000 maxima, half at 0.1 and half at 3
  std::vector<double> maxima(1000, 0.1);
  std::fill(maxima.begin(), maxima.begin() + 500, 3.0);
  const std::vector<double> grid{0.05, 2.0, 50.0};
  const auto rows = check_tail_bound(study, TailRegime::subgaussian, grid, maxima);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].pass);  // bound ~ 1
  EXPECT_EQ(rows[1].empirical_prob, 0.5);
  EXPECT_NEAR(rows[1].bound, prob_any_of_n(std::exp(-2.0), 10), 1e-15);
  EXPECT_TRUE(rows[2].pass);
  EXPECT_EQ(rows[2].empirical_prob, 0.0);
  EXPECT_THROW(check_tail_bound(study, TailRegime::subgaussian, grid, std::vector<double>{}), ValidationError);

  std::ostringstream os;
  write_bound_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, 27), "s,empirical_prob,bound,pass");
}

TEST(Evt, SimulateRequiresReps) {
  MaxSurprisalStudy study{DistributionModel::normal(0, 1), 10, 100, 0.0, 1.0, 0.0, 0.0, 2.0};
  EXPECT_THROW(simulate_max_distribution(study, 1), ValidationError);
}

TEST(Evt, SimulationIndependentOfThreadCount) {
  MaxSurprisalStudy study{DistributionModel::student_t(4), 200, 500, 0.0, 0.0, 0.0, 1.0, 2.0};
  setenv("SURPRISAL_THREADS", "1", 1);
  const auto a = simulate_max_distribution(study, 77);
  setenv("SURPRISAL_THREADS", "4", 1);
  const auto b = simulate_max_distribution(study, 77);
  unsetenv("SURPRISAL_THREADS");
  EXPECT_EQ(a, b);
}

TEST(Evt, SubGaussianBinomialStudyPassesAndHalvedNuFails) {
  const auto model = DistributionModel::binomial(10, 0.5);
  const auto k = estimate_regime_constants(model, TailRegime::subgaussian, 3, 200000);
  EXPECT_GT(k.nu, 0.0);
  const std::vector<double> grid{1.0, 2.0, 4.0};
  const auto study = make_study(model, 1000, 500, k);
  const auto maxima = simulate_max_distribution(study, 4);
  EXPECT_TRUE(all_pass(check_tail_bound(study, TailRegime::subgaussian, grid, maxima)));

  auto halved = study;
  halved.nu *= 0.5;
  EXPECT_FALSE(all_pass(check_tail_bound(halved, TailRegime::subgaussian, grid, maxima)));
}

TEST(Evt, RegimeConstantsForNormalAndT) {
  const auto n = estimate_regime_constants(DistributionModel::normal(0, 1), TailRegime::subexponential, 5, 200000);
  // S = log sqrt(2 pi) + chi2_1 / 2, so E[S] = log sqrt(2 pi) + 1/2
  EXPECT_NEAR(n.entropy_ES, 0.9189385332046727 + 0.5, 0.01);
  EXPECT_GT(n.b, 0.0);
  EXPECT_GT(n.nu, 0.0);
  const auto t = estimate_regime_constants(DistributionModel::student_t(4), TailRegime::polynomial, 6, 200000, 2.0);
  EXPECT_GT(t.C, 0.0);
  EXPECT_EQ(t.p_order, 2.0);
}

TEST(Evt, GumbelMomentFitRecoversParameters) {
  std::mt19937_64 rng(8);
  std::extreme_value_distribution<double> g(1.5, 0.7);
  std::vector<double> x(20000);
  for (auto& v : x) v = g(rng);
  const auto fit = fit_gumbel_moments(x);
  EXPECT_NEAR(fit.location, 1.5, 0.03);
  EXPECT_NEAR(fit.scale, 0.7, 0.03);
  EXPECT_LT(gumbel_ks_distance(x, fit), 0.02);
  EXPECT_GT(gumbel_ks_distance(x, {fit.location + 1.0, fit.scale}), 0.3);
}
