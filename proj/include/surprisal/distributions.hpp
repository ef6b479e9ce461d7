#pragma once

// Generalized density models: log-density evaluation, sampling and (for
// scalar models) distribution functions.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "surprisal/error.hpp"
#include "surprisal/special.hpp"

namespace surprisal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Row-major block of n points of equal dimension.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    detail::require(dim_ > 0, "Dataset: dimension must be positive");
    detail::require(values_.size() % dim_ == 0, "Dataset: value count is not a multiple of the dimension");
  }
  static Dataset scalar(std::vector<double> values) { return Dataset(1, std::move(values)); }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * dim_ + j];
    return out;
  }

 private:
  std::size_t dim_ = 1;
  std::vector<double> values_;
};

struct Normal {
  double mu;
  double sigma;
};

struct StudentT {
  double nu;
  double loc;
  double scale;
};

struct Gamma {
  double shape;
  double rate;
};

struct Binomial {
  std::int64_t trials;
  double prob;
};

class DistributionModel;

struct IndependentProduct {
  std::vector<DistributionModel> components;
};

/// Immutable tagged union of the supported parametric models. Parameters are
/// validated by the named constructors; evaluation never re-validates.
class DistributionModel {
 public:
  using Variant = std::variant<Normal, StudentT, Gamma, Binomial, IndependentProduct>;

  static DistributionModel normal(double mu, double sigma) {
    detail::require(std::isfinite(mu), "normal: mu must be finite");
    detail::require(std::isfinite(sigma) && sigma > 0.0, "normal: sigma must be positive");
    return DistributionModel(Normal{mu, sigma});
  }
  static DistributionModel student_t(double nu, double loc = 0.0, double scale = 1.0) {
    detail::require(std::isfinite(nu) && nu > 0.0, "t: nu must be positive");
    detail::require(std::isfinite(loc), "t: loc must be finite");
    detail::require(std::isfinite(scale) && scale > 0.0, "t: scale must be positive");
    return DistributionModel(StudentT{nu, loc, scale});
  }
  static DistributionModel gamma(double shape, double rate) {
    detail::require(std::isfinite(shape) && shape > 0.0, "gamma: shape must be positive");
    detail::require(std::isfinite(rate) && rate > 0.0, "gamma: rate must be positive");
    return DistributionModel(Gamma{shape, rate});
  }
  static DistributionModel binomial(std::int64_t trials, double prob) {
    detail::require(trials >= 0, "binomial: trials must be nonnegative");
    detail::require(prob >= 0.0 && prob <= 1.0, "binomial: prob must lie in [0,1]");
    return DistributionModel(Binomial{trials, prob});
  }
  static DistributionModel product(std::vector<DistributionModel> components) {
    detail::require(!components.empty(), "product: needs at least one component");
    return DistributionModel(IndependentProduct{std::move(components)});
  }

  const Variant& variant() const noexcept { return v_; }

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&v_);
  }

  /// Number of coordinates in a point.
  std::size_t arity() const {
    if (const auto* p = as<IndependentProduct>()) {
      std::size_t total = 0;
      for (const auto& c : p->components) total += c.arity();
      return total;
    }
    return 1;
  }

  bool is_discrete() const {
    if (as<Binomial>()) return true;
    if (const auto* p = as<IndependentProduct>()) {
      for (const auto& c : p->components)
        if (!c.is_discrete()) return false;
      return true;
    }
    return false;
  }

  /// Text form accepted by the model-spec parser.
  std::string describe() const {
    std::ostringstream os;
    const auto num = [](double v) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, res.ptr);
    };
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Normal>) {
            os << "normal(mu=" << num(m.mu) << ",sigma=" << num(m.sigma) << ")";
          } else if constexpr (std::is_same_v<M, StudentT>) {
            os << "t(nu=" << num(m.nu) << ",loc=" << num(m.loc) << ",scale=" << num(m.scale) << ")";
          } else if constexpr (std::is_same_v<M, Gamma>) {
            os << "gamma(shape=" << num(m.shape) << ",rate=" << num(m.rate) << ")";
          } else if constexpr (std::is_same_v<M, Binomial>) {
            os << "binomial(trials=" << m.trials << ",prob=" << num(m.prob) << ")";
          } else {
            os << "product(";
            for (std::size_t i = 0; i < m.components.size(); ++i)
              os << (i ? "," : "") << m.components[i].describe();
            os << ")";
          }
        },
        v_);
    return os.str();
  }

 private:
  explicit DistributionModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// ---------------------------------------------------------------------------
// log-density

namespace detail {

inline double normal_log_density(const Normal& m, double y) {
  const double z = (y - m.mu) / m.sigma;
  return -kLogSqrt2Pi - std::log(m.sigma) - 0.5 * z * z;
}

inline double student_t_log_density(const StudentT& m, double y) {
  const double z = (y - m.loc) / m.scale;
  return log_gamma(0.5 * (m.nu + 1.0)) - log_gamma(0.5 * m.nu) - 0.5 * std::log(m.nu * M_PI) -
         std::log(m.scale) - 0.5 * (m.nu + 1.0) * std::log1p(z * z / m.nu);
}

inline double gamma_log_density(const Gamma& m, double y) {
  if (std::isnan(y)) return y;
  if (y < 0.0 || !std::isfinite(y)) return -kInf;
  if (y == 0.0) {
    if (m.shape == 1.0) return std::log(m.rate);
    return m.shape > 1.0 ? -kInf : kInf;
  }
  return m.shape * std::log(m.rate) + (m.shape - 1.0) * std::log(y) - m.rate * y - log_gamma(m.shape);
}

inline double log_choose(std::int64_t n, std::int64_t k) {
  return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

inline double binomial_log_pmf(std::int64_t trials, double prob, double y) {
  if (std::isnan(y)) return y;
  if (y < 0.0 || y > static_cast<double>(trials) || y != std::floor(y)) return -kInf;
  const auto k = static_cast<std::int64_t>(y);
  double out = log_choose(trials, k);
  if (k > 0) {
    if (prob == 0.0) return -kInf;
    out += static_cast<double>(k) * std::log(prob);
  }
  if (k < trials) {
    if (prob == 1.0) return -kInf;
    out += static_cast<double>(trials - k) * std::log1p(-prob);
  }
  return out;
}

inline double log_density_unchecked(const DistributionModel& model, std::span<const double> y) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Normal>) {
          return normal_log_density(m, y[0]);
        } else if constexpr (std::is_same_v<M, StudentT>) {
          return student_t_log_density(m, y[0]);
        } else if constexpr (std::is_same_v<M, Gamma>) {
          return gamma_log_density(m, y[0]);
        } else if constexpr (std::is_same_v<M, Binomial>) {
          return binomial_log_pmf(m.trials, m.prob, y[0]);
        } else {
          double total = 0.0;
          std::size_t offset = 0;
          for (const auto& c : m.components) {
            const std::size_t k = c.arity();
            total += log_density_unchecked(c, y.subspan(offset, k));
            offset += k;
          }
          return total;
        }
      },
      model.variant());
}

}  // namespace detail

/// log f(y). Returns -inf where the density vanishes. Throws ValidationError
/// when y does not have the model's arity.
inline double log_density(const DistributionModel& model, std::span<const double> y) {
  if (y.size() != model.arity()) {
    throw ValidationError("log_density: point has " + std::to_string(y.size()) +
                          " coordinates, model " + model.describe() + " expects " +
                          std::to_string(model.arity()));
  }
  return detail::log_density_unchecked(model, y);
}

inline double log_density(const DistributionModel& model, double y) {
  return log_density(model, std::span<const double>(&y, 1));
}

// ---------------------------------------------------------------------------
// sampling

namespace detail {

template <class Engine>
void sample_point(const DistributionModel& model, Engine& rng, std::span<double> out) {
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Normal>) {
          out[0] = std::normal_distribution<double>(m.mu, m.sigma)(rng);
        } else if constexpr (std::is_same_v<M, StudentT>) {
          out[0] = m.loc + m.scale * std::student_t_distribution<double>(m.nu)(rng);
        } else if constexpr (std::is_same_v<M, Gamma>) {
          out[0] = std::gamma_distribution<double>(m.shape, 1.0 / m.rate)(rng);
        } else if constexpr (std::is_same_v<M, Binomial>) {
          out[0] = m.trials == 0
                       ? 0.0
                       : static_cast<double>(std::binomial_distribution<std::int64_t>(m.trials, m.prob)(rng));
        } else {
          std::size_t offset = 0;
          for (const auto& c : m.components) {
            const std::size_t k = c.arity();
            sample_point(c, rng, out.subspan(offset, k));
            offset += k;
          }
        }
      },
      model.variant());
}

}  // namespace detail

/// n iid draws, deterministic for a given seed.
inline Dataset sample(const DistributionModel& model, std::size_t n, std::uint64_t seed) {
  detail::require(n > 0, "sample: n must be positive");
  const std::size_t dim = model.arity();
  Dataset out(dim, std::vector<double>(n * dim));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) detail::sample_point(model, rng, out.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// distribution functions (scalar models only)

/// Pr(Y <= y) for a scalar model.
inline double cdf(const DistributionModel& model, double y) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Normal>) {
          return normal_cdf((y - m.mu) / m.sigma);
        } else if constexpr (std::is_same_v<M, StudentT>) {
          return student_t_cdf((y - m.loc) / m.scale, m.nu);
        } else if constexpr (std::is_same_v<M, Gamma>) {
          return gamma_cdf(y, m.shape, m.rate);
        } else if constexpr (std::is_same_v<M, Binomial>) {
          if (y < 0.0) return 0.0;
          const auto top = static_cast<std::int64_t>(std::floor(std::min(y, static_cast<double>(m.trials))));
          double total = 0.0;
          for (std::int64_t k = 0; k <= top; ++k)
            total += std::exp(detail::binomial_log_pmf(m.trials, m.prob, static_cast<double>(k)));
          return std::min(total, 1.0);
        } else {
          throw ValidationError("cdf: only defined for scalar models");
        }
      },
      model.variant());
}

}  // namespace surprisal
