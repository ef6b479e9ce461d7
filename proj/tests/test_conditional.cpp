#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "surprisal/conditional.hpp"
#include "surprisal/scoring.hpp"

using namespace surprisal;

namespace {

std::vector<double> noisy_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = 0.01 * static_cast<double>(t) + z(rng);
  return y;
}

}  // namespace

TEST(Hampel, MadConstantIsComputed) { EXPECT_NEAR(mad_normal_constant(), 0.6744897501960817, 1e-15); }

TEST(Hampel, MedianAndMad) {
  const std::vector<double> v{5, 1, 3, 2, 4};
  EXPECT_EQ(median(v), 3.0);
  EXPECT_EQ(mad(v), 1.0);
  EXPECT_EQ(median(std::vector<double>{4, 1, 2, 3}), 2.5);
}

TEST(Hampel, AlphaTauConversion) {
  // 2(1 - Phi(3 * qnorm(0.75)))
  EXPECT_NEAR(hampel_alpha_from_tau(3.0), 0.04302479073838961, 1e-15);
  EXPECT_NEAR(hampel_tau_from_alpha(0.01), 3.81893023993334, 1e-12);
  for (double tau : {0.5, 1.0, 2.0, 3.0, 5.0, 7.5}) EXPECT_NEAR(hampel_tau_from_alpha(hampel_alpha_from_tau(tau)), tau, 1e-9);
  double prev = 0.0;
  for (double alpha : {0.5, 0.1, 1e-2, 1e-4, 1e-8, 1e-12}) {
    const double tau = hampel_tau_from_alpha(alpha);
    EXPECT_GT(tau, prev);
    prev = tau;
  }
  EXPECT_THROW(hampel_alpha_from_tau(0.0), ValidationError);
  EXPECT_THROW(hampel_tau_from_alpha(1.0), ValidationError);
}

TEST(Hampel, PointAtMedianHasMinimalSurprisal) {
  const std::vector<double> y{1, 4, 2, 8, 3, 7, 5};
  const auto h = hampel_surprisals(y, HampelModel{3, std::nullopt});
  // t = 3: window is the whole series, median 4; y[1] = 4 sits at the median of window t=1? check t with y_t == m_t
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] != h.medians[t]) continue;
    EXPECT_NEAR(h.sample.surprisals[t], std::log(h.sigmas[t] * std::sqrt(2.0 * M_PI)), 1e-14);
  }
  EXPECT_EQ(h.medians[3], 4.0);
}

TEST(Hampel, SurprisalFormula) {
  const auto y = noisy_series(60, 1);
  const auto h = hampel_surprisals(y, HampelModel{5, std::nullopt});
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double sigma = h.mads[t] / mad_normal_constant();
    EXPECT_NEAR(h.sigmas[t], sigma, 1e-15);
    EXPECT_NEAR(h.sample.surprisals[t], -log_density(DistributionModel::normal(h.medians[t], sigma), y[t]), 1e-12);
  }
}

TEST(Hampel, ConstantSeries) {
  const std::vector<double> y(30, 2.5);
  EXPECT_THROW(hampel_surprisals(y, HampelModel{3, 0.0}), ValidationError);
  EXPECT_THROW(hampel_surprisals(y, HampelModel{3, std::nullopt}), ValidationError);  // series MAD is 0 too
  const auto h = hampel_surprisals(y, HampelModel{3, 0.1});
  for (double s : h.sample.surprisals) EXPECT_EQ(s, h.sample.surprisals[0]);
  EXPECT_TRUE(flag_anomalies(hampel_assumed_tail(h), 0.999).flagged.empty());
}

TEST(Hampel, DegenerateWindowErrorNamesWindow) {
  std::vector<double> y = noisy_series(40, 2);
  for (std::size_t t = 10; t < 25; ++t) y[t] = 1.0;
  try {
    hampel_surprisals(y, HampelModel{3, 0.0});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
  }
}

TEST(Hampel, LocationInvariance) {
  const auto y = noisy_series(80, 3);
  auto shifted = y;
  for (auto& v : shifted) v += 1000.0;
  const auto a = hampel_surprisals(y, HampelModel{4, 1e-6});
  const auto b = hampel_surprisals(shifted, HampelModel{4, 1e-6});
  for (std::size_t t = 0; t < y.size(); ++t) {
    EXPECT_NEAR(b.medians[t] - 1000.0, a.medians[t], 1e-9);
    EXPECT_NEAR(b.sample.surprisals[t], a.sample.surprisals[t], 1e-9);
  }
}

TEST(Hampel, EquivalentToClassicalIdentifier) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto y = noisy_series(300, 100 + seed);
    y[50] += 8.0;
    y[200] -= 6.0;
    const auto h = hampel_surprisals(y, HampelModel{10, std::nullopt});
    for (double tau : {2.0, 3.0, 4.0}) {
      const auto report = flag_anomalies(hampel_assumed_tail(h), hampel_alpha_from_tau(tau));
      std::vector<std::size_t> classical;
      for (std::size_t t = 0; t < y.size(); ++t) {
        ASSERT_GT(h.mads[t], h.min_scale);
        if (std::fabs(y[t] - h.medians[t]) / h.mads[t] > tau) classical.push_back(t);
      }
      EXPECT_EQ(report.flagged, classical) << "seed " << seed << " tau " << tau;
    }
  }
}

TEST(Hampel, RejectsBadInput) {
  EXPECT_THROW(hampel_surprisals(std::vector<double>{1, 2}, HampelModel{3, 0.1}), ValidationError);
  EXPECT_THROW(hampel_surprisals(noisy_series(20, 1), HampelModel{0, 0.1}), ValidationError);
  auto y = noisy_series(20, 1);
  y[4] = std::nan("");
  EXPECT_THROW(hampel_surprisals(y, HampelModel{3, 0.1}), ValidationError);
}

TEST(NaturalSpline, LinearBeyondBoundaryKnots) {
  const std::vector<double> knots{0.0, 1.0, 2.5, 4.0};
  for (double x : {4.5, -3.0}) {
    const auto a = natural_spline_basis(x, knots);
    const auto b = natural_spline_basis(x + 1.0, knots);
    const auto c = natural_spline_basis(x + 2.0, knots);
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(c[j] - 2.0 * b[j] + a[j], 0.0, 1e-9) << j;
  }
  EXPECT_EQ(natural_spline_basis(0.3, knots).size(), knots.size());
}

namespace {

struct Careers {
  std::vector<std::int64_t> innings;
  std::vector<std::int64_t> notouts;
};

template <class P>
Careers simulate_careers(std::size_t n, P prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> career(std::log(15.0), 1.2);
  Careers c;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = std::clamp<std::int64_t>(std::llround(career(rng)), 1, 300);
    std::binomial_distribution<std::int64_t> draw(k, prob(static_cast<double>(k)));
    c.innings.push_back(k);
    c.notouts.push_back(draw(rng));
  }
  return c;
}

}  // namespace

TEST(BinomialSmooth, ConstantProbabilityIsRecovered) {
  const auto c = simulate_careers(2000, [](double) { return 0.13; }, 5);
  const auto fit = fit_binomial_smooth(c.innings, c.notouts);
  for (double k : {1.0, 5.0, 20.0, 80.0, 250.0}) EXPECT_NEAR(fit.fitted_prob(k), 0.13, 0.02) << k;
}

TEST(BinomialSmooth, TracksNonMonotoneCurve) {
  auto truth = [](double k) { return 0.11 + 0.08 * std::exp(-0.5 * std::pow(std::log(k / 2.0), 2)) + 0.0001 * k; };
  const auto c = simulate_careers(3000, truth, 6);
  const auto fit = fit_binomial_smooth(c.innings, c.notouts);
  EXPECT_GT(fit.fitted_prob(2.0), fit.fitted_prob(60.0));
  for (double k : {2.0, 10.0, 60.0}) EXPECT_NEAR(fit.fitted_prob(k), truth(k), 0.03) << k;
  for (double k = 1.0; k < 400.0; k *= 1.5) {
    EXPECT_GT(fit.fitted_prob(k), 0.0);
    EXPECT_LT(fit.fitted_prob(k), 1.0);
  }
}

TEST(BinomialSmooth, SurprisalIsUShapedInNotouts) {
  const auto c = simulate_careers(500, [](double) { return 0.2; }, 7);
  const auto fit = fit_binomial_smooth(c.innings, c.notouts);
  const std::int64_t k = 100;
  std::vector<std::int64_t> innings(k + 1, k), notouts(k + 1);
  for (std::int64_t j = 0; j <= k; ++j) notouts[static_cast<std::size_t>(j)] = j;
  const auto s = binomial_surprisals(fit, innings, notouts).surprisals;
  const auto mode = std::min_element(s.begin(), s.end()) - s.begin();
  EXPECT_NEAR(static_cast<double>(mode), std::floor((k + 1) * fit.fitted_prob(k)), 1.0);
  for (auto j = mode; j < k; ++j) EXPECT_LT(s[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j + 1)]);
  for (auto j = mode; j > 0; --j) EXPECT_LT(s[static_cast<std::size_t>(j)], s[static_cast<std::size_t>(j - 1)]);
}

TEST(BinomialSmooth, Errors) {
  const std::vector<std::int64_t> one_i{10}, one_n{2};
  EXPECT_THROW(fit_binomial_smooth(one_i, one_n), ValidationError);
  auto c = simulate_careers(100, [](double) { return 0.2; }, 8);
  auto bad = c;
  bad.notouts[3] = bad.innings[3] + 1;
  EXPECT_THROW(fit_binomial_smooth(bad.innings, bad.notouts), ValidationError);
  auto zero = c;
  zero.innings[0] = 0;
  zero.notouts[0] = 0;
  EXPECT_THROW(fit_binomial_smooth(zero.innings, zero.notouts), ValidationError);
  std::fill(c.notouts.begin(), c.notouts.end(), 0);
  try {
    fit_binomial_smooth(c.innings, c.notouts);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("separat"), std::string::npos);
  }
}
