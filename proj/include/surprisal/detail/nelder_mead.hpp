#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace surprisal::detail {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x;
  double value;
  std::size_t evaluations;
  bool converged;
};

/// Nelder-Mead minimization with standard coefficients. The objective may
/// return +inf to mark infeasible points. Stops when both the spread of
/// values and the simplex diameter fall below the tolerances.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& objective, std::array<double, N> start, std::array<double, N> step,
                             double value_tol = 1e-12, double x_tol = 1e-10, std::size_t max_evals = 4000) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> vals;
  std::size_t evals = 0;
  auto eval = [&](const Point& p) {
    ++evals;
    const double v = objective(p);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  pts[0] = start;
  vals[0] = eval(start);
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += step[i];
    vals[i + 1] = eval(pts[i + 1]);
  }

  std::array<std::size_t, N + 1> order;
  bool converged = false;
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0], worst = order[N], second = order[N - 1];

    double diameter = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t d = 0; d < N; ++d) diameter = std::max(diameter, std::fabs(pts[order[i]][d] - pts[best][d]));
    const double spread = vals[worst] - vals[best];
    if (std::isfinite(vals[worst]) && spread <= value_tol * (1.0 + std::fabs(vals[best])) && diameter <= x_tol) {
      converged = true;
      break;
    }

    Point centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t d = 0; d < N; ++d) centroid[d] += pts[order[i]][d] / static_cast<double>(N);

    auto along = [&](double t) {
      Point p;
      for (std::size_t d = 0; d < N; ++d) p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
      return p;
    };

    const Point reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < vals[best]) {
      const Point expanded = along(-2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Point contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= N; ++i) {
      const std::size_t k = order[i];
      for (std::size_t d = 0; d < N; ++d) pts[k][d] = pts[best][d] + 0.5 * (pts[k][d] - pts[best][d]);
      vals[k] = eval(pts[k]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= N; ++i)
    if (vals[i] < vals[best]) best = i;
  return {pts[best], vals[best], evals, converged};
}

}  // namespace surprisal::detail
