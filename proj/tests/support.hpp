#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sven/matrix.hpp"
#include "sven/rng.hpp"

namespace sven::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::logic_error("length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  return max_abs_diff(a, b) / std::max(scale, 1e-300);
}

// Gaussian elimination with partial pivoting, kept independent of the
// library's factorizations so it can serve as an oracle.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) throw std::runtime_error("singular system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

// Minimum-norm solution of a x = r for full-row-rank a: aᵀ (a aᵀ)⁻¹ r.
inline std::vector<double> min_norm_solution(const Matrix& a, std::span<const double> r) {
  Matrix g(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * a(j, c);
      g(i, j) = s;
    }
  const auto y = gauss_solve(g, std::vector<double>(r.begin(), r.end()));
  std::vector<double> x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t c = 0; c < a.cols(); ++c) x[c] += a(i, c) * y[i];
  return x;
}

// Least-squares solution of a x ≈ r for full-column-rank a: (aᵀa)⁻¹ aᵀ r.
inline std::vector<double> least_squares_solution(const Matrix& a, std::span<const double> r) {
  Matrix g(a.cols(), a.cols());
  std::vector<double> rhs(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows(); ++p) s += a(p, i) * a(p, j);
      g(i, j) = s;
    }
    for (std::size_t p = 0; p < a.rows(); ++p) rhs[i] += a(p, i) * r[p];
  }
  return gauss_solve(g, rhs);
}

}  // namespace sven::testing
