#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sven/matrix.hpp"

namespace sven::linalg {

/// Thin SVD factors m ≈ u · diag(s) · vt.
///
/// `s` is sorted descending and non-negative; `u` is rows×r with orthonormal
/// columns and `vt` is r×cols with orthonormal rows.
struct SvdFactors {
  Matrix u;
  std::vector<double> s;
  Matrix vt;

  std::size_t rank() const noexcept { return s.size(); }
};

/// Singular values below this fraction of the largest one are treated as
/// exact zeros (round-off rank), independently of any user tolerance.
inline constexpr double kMachineRankTol = 1e-14;

/// Sweep cap and relative off-diagonal threshold of the Jacobi iteration.
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTol = 1e-12;

/// Randomized SVD sketch parameters: oversampling and power iterations.
inline constexpr std::size_t kOversampling = 8;
inline constexpr int kPowerIterations = 2;
/// Matrices whose short side is at most this multiple of the sketch width are
/// first reduced to the triangular factor of an LQ (or QR) factorization.
inline constexpr std::size_t kCompressRatio = 2 * kPowerIterations + 2;

/// Full thin SVD, r = min(rows, cols).
///
/// Householder LQ of the wide orientation followed by one-sided Jacobi on the
/// r×r triangular factor. Throws NumericError on non-finite input or when the
/// Jacobi sweeps fail to converge.
SvdFactors dense_svd(const Matrix& m);

/// Top-k singular triplets via a Gaussian sketch with oversampling and power
/// iterations; falls back to dense_svd when the sketch would cover the whole
/// thin dimension. Keeps s_i only if s_i >= rtol * s_1 and s_i is above the
/// machine-rank threshold; the result may therefore hold fewer than k
/// triplets (possibly none).
SvdFactors randomized_truncated_svd(const Matrix& m, std::size_t k, double rtol,
                                    std::uint64_t seed);

struct TruncatedSolve {
  std::vector<double> x;  // pinv_apply of the truncated factors to r
  std::vector<double> s;  // retained singular values
};

/// pinv_apply(randomized_truncated_svd(m, k, rtol, seed), r) up to rounding,
/// without forming the singular vectors of the long side.
TruncatedSolve truncated_pinv_solve(const Matrix& m, std::span<const double> r, std::size_t k,
                                    double rtol, std::uint64_t seed);

/// v · diag(1/s) · uᵀ · r, applied factor by factor. Singular values that are
/// zero or below the machine-rank threshold contribute nothing.
std::vector<double> pinv_apply(const SvdFactors& f, std::span<const double> r);

/// Dense pseudoinverse vt ᵀ· diag(1/s) · uᵀ (cols×rows) from the factors.
Matrix pinv_matrix(const SvdFactors& f);

/// Orthonormal basis for the row space of `w` (r×n, r <= n) by Householder
/// reflections: w = l · q with l lower-triangular r×r and q r×n with
/// orthonormal rows. Rank-deficient inputs still yield orthonormal q.
struct LqFactors {
  Matrix l;
  Matrix q;
};
LqFactors householder_lq(const Matrix& w);

/// Solves a·x = b for symmetric positive definite a by Cholesky. Throws
/// NumericError if a is not numerically positive definite.
std::vector<double> solve_spd(const Matrix& a, std::span<const double> b);

}  // namespace sven::linalg
