#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stiefel/matrix.hpp"

namespace stiefel::testing {

/// Central differences of f at x.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double h = 1e-6) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Jacobian columns d vec(F(x)) / dx_i by central differences (column-major vec).
inline Matrix fd_jacobian(const std::function<Matrix(std::span<const double>)>& f, std::span<const double> x,
                          double h = 1e-6) {
  std::vector<double> probe(x.begin(), x.end());
  const std::size_t m = f(x).size();
  Matrix jac(m, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const auto up = f(probe).vec();
    probe[i] = orig - h;
    const auto down = f(probe).vec();
    probe[i] = orig;
    for (std::size_t r = 0; r < m; ++r) jac(r, i) = (up[r] - down[r]) / (2.0 * h);
  }
  return jac;
}

inline std::vector<double> normal_vector(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

inline Matrix normal_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double sd = 1.0) {
  return Matrix(rows, cols, normal_vector(rows * cols, rng, sd));
}

/// max |a_i - b_i| / max(1, |b_i|)
inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

}  // namespace stiefel::testing

namespace stiefel::testing {

/// ||a - b||_inf / max(1, ||b||_inf)
inline double rel_error_inf(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

}  // namespace stiefel::testing
