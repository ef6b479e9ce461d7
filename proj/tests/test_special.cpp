#include <gtest/gtest.h>

#include <cmath>

#include "surprisal/error.hpp"
#include "surprisal/parallel.hpp"
#include "surprisal/special.hpp"

using namespace surprisal;

// Reference values below were computed with scipy / mpmath.

TEST(Special, NormalQuantileOracles) {
  EXPECT_NEAR(normal_quantile(0.75), 0.6744897501960817, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-8), -5.612001244174789, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-16);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
}

TEST(Special, NormalQuantileInvertsCdf) {
  for (double p = 1e-12; p < 1.0; p = p < 0.01 ? p * 10.0 : p + 0.01) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13 * std::max(1.0, p / 1e-3)) << p;
  }
}

TEST(Special, NormalQuantileRejectsOutsideUnitInterval) {
  EXPECT_THROW(normal_quantile(0.0), ValidationError);
  EXPECT_THROW(normal_quantile(1.0), ValidationError);
  EXPECT_THROW(normal_quantile(-0.1), ValidationError);
  EXPECT_THROW(normal_quantile(std::nan("")), ValidationError);
}

TEST(Special, NormalTails) {
  EXPECT_NEAR(2.0 * normal_ccdf(2.5), 0.012419330651552318, 1e-15);
  EXPECT_NEAR(2.0 * normal_ccdf(3.0), 0.0026997960632601866, 1e-15);
  EXPECT_NEAR(2.0 * (1.0 - normal_cdf(1.959964)), 0.049999998192884795, 1e-15);
  // far tail keeps relative accuracy
  EXPECT_NEAR(normal_ccdf(10.0) / 7.619853024160527e-24, 1.0, 1e-12);
}

TEST(Special, LogGamma) {
  EXPECT_NEAR(log_gamma(100.5), 361.435540467777621555, 1e-11);
  EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-15);
  EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(M_PI), 1e-15);
}

TEST(Special, StudentT) {
  EXPECT_NEAR(student_t_cdf(1.5, 4.0), 0.896, 1e-14);
  EXPECT_NEAR(2.0 * student_t_ccdf(3.0, 4.0), 0.03994196807171883, 1e-15);
  EXPECT_NEAR(student_t_cdf(0.0, 7.0), 0.5, 1e-15);
  EXPECT_NEAR(student_t_cdf(-1.5, 4.0), 1.0 - 0.896, 1e-14);
}

TEST(Special, GammaAndChiSquare) {
  EXPECT_NEAR(gamma_cdf(1.0, 2.0, 2.0), 0.5939941502901616, 1e-15);
  EXPECT_NEAR(gamma_cdf(1.0, 2.0, 2.0) + gamma_ccdf(1.0, 2.0, 2.0), 1.0, 1e-15);
  EXPECT_NEAR(chi_square_ccdf(2.0, 2.0), std::exp(-1.0), 1e-15);
}

TEST(Parallel, SplitSeedIsDeterministicAndDistinct) {
  EXPECT_EQ(split_seed(7, 3), split_seed(7, 3));
  EXPECT_NE(split_seed(7, 3), split_seed(7, 4));
  EXPECT_NE(split_seed(7, 3), split_seed(8, 3));
}

TEST(Parallel, ParallelForCoversEveryIndexAndPropagatesErrors) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw ValidationError("boom");
               }),
               ValidationError);
}
