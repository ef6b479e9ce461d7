#pragma once

// Pr(S >= s) computed from the assumed model itself, S = -log f(Y), Y ~ model.
//
//   normal         two-sided Normal tail of the implied |z|
//   t              two-sided Student-t tail of the implied |z|
//   gamma          mass outside the density level set {f > e^-s}
//   binomial       sum of pmf values not exceeding e^-s
//   product of     chi-square tail of 2(s - sum of log normalizers)
//   normals
//   other products Monte-Carlo reference sample of surprisals

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "surprisal/distributions.hpp"
#include "surprisal/empirical_tail.hpp"
#include "surprisal/special.hpp"

namespace surprisal {

namespace detail {

/// Root of an increasing function g on [lo, hi] with g(lo) < 0 < g(hi).
template <class G>
double bisect_increasing(G&& g, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double gamma_assumed_tail(const Gamma& m, double s) {
  const double level = -s;  // log f(y) <= level  <=>  surprisal >= s
  auto logf = [&](double y) { return gamma_log_density(m, y); };

  if (m.shape > 1.0) {
    const double mode = (m.shape - 1.0) / m.rate;
    if (level >= logf(mode)) return 1.0;
    // lower crossing in (0, mode): logf increases from -inf
    const double y_lo = bisect_increasing([&](double y) { return logf(y) - level; }, 0.0, mode);
    double hi = std::max(2.0 * mode, 1.0 / m.rate);
    while (logf(hi) > level) hi *= 2.0;
    const double y_hi = bisect_increasing([&](double y) { return level - logf(y); }, mode, hi);
    return std::min(1.0, gamma_cdf(y_lo, m.shape, m.rate) + gamma_ccdf(y_hi, m.shape, m.rate));
  }
  if (m.shape == 1.0) {
    const double y = (std::log(m.rate) + s) / m.rate;
    return y <= 0.0 ? 1.0 : std::exp(-m.rate * y);
  }
  // shape < 1: density decreases from +inf
  double hi = 1.0 / m.rate;
  while (logf(hi) > level) hi *= 2.0;
  double lo = hi;
  while (lo > 1e-300 && logf(lo) <= level) lo *= 0.5;
  if (logf(lo) <= level) return 1.0;
  const double y = bisect_increasing([&](double y) { return level - logf(y); }, lo, hi);
  return gamma_ccdf(y, m.shape, m.rate);
}

inline double binomial_assumed_tail(const Binomial& m, double s) {
  const double level = -s;
  const double tol = 1e-12 * std::max(1.0, std::fabs(level));
  double total = 0.0;
  for (std::int64_t k = 0; k <= m.trials; ++k) {
    const double lp = binomial_log_pmf(m.trials, m.prob, static_cast<double>(k));
    if (lp <= level + tol) total += std::exp(lp);
  }
  return std::min(total, 1.0);
}

}  // namespace detail

/// Tail function of the surprisal distribution implied by an assumed model.
/// Models without a closed form use a seeded Monte-Carlo reference sample.
class AssumedTail {
 public:
  explicit AssumedTail(DistributionModel model, std::uint64_t seed = 0, std::size_t reference_draws = 200'000)
      : model_(std::move(model)) {
    if (const auto* p = model_.as<IndependentProduct>()) {
      all_normal_ = std::all_of(p->components.begin(), p->components.end(),
                                [](const DistributionModel& c) { return c.as<Normal>() != nullptr; });
      if (all_normal_) {
        for (const auto& c : p->components) normal_offset_ += kLogSqrt2Pi + std::log(c.as<Normal>()->sigma);
      } else {
        reference_.emplace(detail::model_surprisals(model_, sample(model_, reference_draws, seed)));
      }
    }
  }

  const DistributionModel& model() const noexcept { return model_; }
  bool is_monte_carlo() const noexcept { return reference_.has_value(); }

  /// Pr(S >= s) under the model.
  double operator()(double s) const {
    if (std::isnan(s)) return s;
    if (s == kInf) return 0.0;
    if (s == -kInf) return 1.0;
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Normal>) {
            const double z2 = 2.0 * (s - kLogSqrt2Pi - std::log(m.sigma));
            return z2 <= 0.0 ? 1.0 : 2.0 * normal_ccdf(std::sqrt(z2));
          } else if constexpr (std::is_same_v<M, StudentT>) {
            const double c = -detail::student_t_log_density(m, m.loc);
            if (s <= c) return 1.0;
            const double z2 = m.nu * std::expm1(2.0 * (s - c) / (m.nu + 1.0));
            return 2.0 * student_t_ccdf(std::sqrt(z2), m.nu);
          } else if constexpr (std::is_same_v<M, Gamma>) {
            return detail::gamma_assumed_tail(m, s);
          } else if constexpr (std::is_same_v<M, Binomial>) {
            return detail::binomial_assumed_tail(m, s);
          } else {
            if (all_normal_) return chi_square_ccdf(2.0 * (s - normal_offset_), static_cast<double>(m.components.size()));
            return reference_->tail_prob(s);
          }
        },
        model_.variant());
  }

 private:
  DistributionModel model_;
  bool all_normal_ = false;
  double normal_offset_ = 0.0;
  std::optional<EcdfTail> reference_;
};

}  // namespace surprisal
