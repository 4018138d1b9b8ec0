#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "spdesign/core.hpp"

namespace oracle {

/// Adaptive tanh-sinh quadrature on [a, b]; tolerant of endpoint kinks and
/// integrable endpoint singularities, so split integrals at interior kinks.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  static boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate([&f](double x) { return f(x); }, a, b, tol);
}

/// Integral over [0,1] split at the given interior kinks.
inline double integrate_pieces(const std::function<double(double)>& f, std::vector<double> kinks) {
  kinks.push_back(0.0);
  kinks.push_back(1.0);
  std::sort(kinks.begin(), kinks.end());
  double v = 0.0;
  for (std::size_t k = 0; k + 1 < kinks.size(); ++k) {
    const double a = std::clamp(kinks[k], 0.0, 1.0), b = std::clamp(kinks[k + 1], 0.0, 1.0);
    if (b > a) v += integrate(f, a, b);
  }
  return v;
}

/// E|x - Y|^q, Y ~ U[0,1], by quadrature split at x.
inline double mean_abs_pow(double x, double q) {
  return integrate_pieces([&](double y) { return std::pow(std::abs(x - y), q); }, {x});
}

/// 1-d q-energy distance between U[0,1] and the points, every term by quadrature.
inline double q_energy_1d(const std::vector<double>& x, double q) {
  const double n = static_cast<double>(x.size());
  double a = 0.0, c = 0.0;
  for (double xi : x) a += mean_abs_pow(xi, q);
  for (double xi : x) {
    for (double xj : x) c += std::pow(std::abs(xi - xj), q);
  }
  const double b = integrate([&](double y) { return mean_abs_pow(y, q); }, 0.0, 1.0);
  return 2.0 * a / n - b - c / (n * n);
}

inline double min_pair_distance(const spd::Matrix& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (i != j) best = std::min(best, (x.row(i) - x.row(j)).norm());
    }
  }
  return best;
}

// Exact 1-d objective: (2/n) sum E|x_i - Y| - (1/n^2) sum_{i,j} |x_i - x_j|.
inline double exact_objective_1d(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0, r = 0.0;
  for (double a : x) {
    s += a * a - a + 0.5;
    for (double b : x) r += std::abs(a - b);
  }
  return 2.0 * s / n - r / (n * n);
}

// Coordinate descent over a dense grid, repeated until no coordinate moves.
inline std::vector<double> grid_search_optimum_1d(std::size_t n) {
  const int G = 20000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (static_cast<double>(i) + 0.3) / static_cast<double>(n);
  for (int pass = 0; pass < 200; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      double best = exact_objective_1d(x), best_v = x[i];
      for (int g = 0; g <= G; ++g) {
        auto y = x;
        y[i] = static_cast<double>(g) / G;
        const double v = exact_objective_1d(y);
        if (v < best - 1e-15) {
          best = v;
          best_v = y[i];
        }
      }
      moved = moved || best_v != x[i];
      x[i] = best_v;
    }
    if (!moved) break;
  }
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace oracle
