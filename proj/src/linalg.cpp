#include "sven/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "sven/error.hpp"
#include "sven/rng.hpp"

namespace sven::linalg {

namespace {

void apply_reflector(std::span<double> x, std::span<const double> v, double vtv) {
  const double scale = 2.0 * dot(x, v) / vtv;
  for (std::size_t j = 0; j < x.size(); ++j) x[j] -= scale * v[j];
}

// w = [l 0]·H_{r−1}···H_0 with the reflectors kept instead of an explicit q.
// With row pivoting, row i of l belongs to row perm[i] of w.
struct CompactLq {
  Matrix l;
  std::vector<std::vector<double>> reflectors;  // reflector i acts on columns i..n−1
  std::vector<double> vtv;
  std::size_t n = 0;
  std::vector<std::size_t> perm;

  // x (k×r) ↦ x·q (k×n), q being the first r rows of H_{r−1}···H_0.
  Matrix apply_q(const Matrix& x) const {
    const std::size_t r = l.rows();
    Matrix out(x.rows(), n);
    for (std::size_t p = 0; p < x.rows(); ++p)
      std::copy_n(x.row(p).begin(), r, out.row(p).begin());
    for (std::size_t i = r; i-- > 0;) {
      if (reflectors[i].empty()) continue;
      for (std::size_t p = 0; p < out.rows(); ++p)
        apply_reflector(out.row(p).subspan(i), reflectors[i], vtv[i]);
    }
    return out;
  }

  // First r entries of H_{r−1}···H_0 · y for y of length n.
  std::vector<double> apply_qt(std::span<const double> y) const {
    std::vector<double> x(y.begin(), y.end());
    for (std::size_t i = 0; i < l.rows(); ++i)
      if (!reflectors[i].empty()) apply_reflector(std::span(x).subspan(i), reflectors[i], vtv[i]);
    x.resize(l.rows());
    return x;
  }
};

CompactLq compact_lq(const Matrix& w, bool pivot = false) {
  const std::size_t r = w.rows();
  const std::size_t n = w.cols();
  if (r > n) throw ShapeError("householder_lq: more rows than columns");
  Matrix a = w;
  CompactLq out{Matrix(r, r), std::vector<std::vector<double>>(r), std::vector<double>(r, 0.0), n,
                std::vector<std::size_t>(r)};
  std::iota(out.perm.begin(), out.perm.end(), 0);
  for (std::size_t i = 0; i < r; ++i) {
    if (pivot) {
      std::size_t best = i;
      double best_norm = -1.0;
      for (std::size_t p = i; p < r; ++p) {
        const auto tail = a.row(p).subspan(i);
        const double v = dot(tail, tail);
        if (v > best_norm) {
          best_norm = v;
          best = p;
        }
      }
      if (best != i) {
        std::swap_ranges(a.row(i).begin(), a.row(i).end(), a.row(best).begin());
        std::swap(out.perm[i], out.perm[best]);
      }
    }
    auto xi = a.row(i).subspan(i);
    const double nrm = norm2(xi);
    if (nrm == 0.0) continue;  // identity reflector
    const double alpha = xi[0] >= 0.0 ? -nrm : nrm;
    std::vector<double> v(xi.begin(), xi.end());
    v[0] -= alpha;
    const double vv = dot(v, v);
    for (std::size_t p = i + 1; p < r; ++p) apply_reflector(a.row(p).subspan(i), v, vv);
    std::fill(xi.begin(), xi.end(), 0.0);
    xi[0] = alpha;
    out.reflectors[i] = std::move(v);
    out.vtv[i] = vv;
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t c = 0; c <= i; ++c) out.l(i, c) = a(i, c);
  return out;
}

// SVD of a wide (r <= n) matrix given as its rows: w = u · diag(s) · vt with
// u r×r orthogonal and vt r×n. `u` is returned transposed (row i = i-th left
// singular vector) since that is what both orientations of dense_svd need.
struct RowSvd {
  Matrix ut;
  std::vector<double> s;
  Matrix vt;
};

// Orthonormal completion of the rows of `y` not flagged in `valid`.
void complete_rows(Matrix& y, std::vector<bool>& valid) {
  const std::size_t r = y.rows();
  for (std::size_t i = 0; i < r; ++i) {
    if (valid[i]) continue;
    for (std::size_t e = 0; e < r && !valid[i]; ++e) {
      auto cand = y.row(i);
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t o = 0; o < r; ++o) {
          if (!valid[o]) continue;
          const double proj = dot(cand, y.row(o));
          auto ov = y.row(o);
          for (std::size_t c = 0; c < r; ++c) cand[c] -= proj * ov[c];
        }
      }
      const double nrm = norm2(cand);
      if (nrm > 0.5) {
        for (double& v : cand) v /= nrm;
        valid[i] = true;
      }
    }
  }
}

// One-sided Jacobi on the rows of lᵀ, where w = P·l·q is a row-pivoted LQ.
// With pivoting the Gram matrix of those rows is close to diagonal, so few
// sweeps are needed.
RowSvd svd_of_rows(const Matrix& w) {
  const std::size_t r = w.rows();
  const CompactLq lq = compact_lq(w, true);
  Matrix x = lq.l.transposed();
  Matrix j = Matrix::identity(r);
  std::vector<double> sq(r);

  int sweep = 0;
  double worst = 0.0;
  for (; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    worst = 0.0;
    for (std::size_t p = 0; p < r; ++p) sq[p] = dot(x.row(p), x.row(p));
    for (std::size_t p = 0; p + 1 < r; ++p) {
      for (std::size_t k = p + 1; k < r; ++k) {
        const double a = sq[p];
        const double b = sq[k];
        if (a == 0.0 || b == 0.0) continue;
        auto xp = x.row(p);
        auto xk = x.row(k);
        const double c = dot(xp, xk);
        const double off = std::abs(c) / std::sqrt(a * b);
        worst = std::max(worst, off);
        if (off <= kJacobiTol) continue;
        rotated = true;
        const double zeta = (b - a) / (2.0 * c);
        const double t =
            std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t col = 0; col < r; ++col) {
          const double xpc = xp[col];
          const double xkc = xk[col];
          xp[col] = cs * xpc - sn * xkc;
          xk[col] = sn * xpc + cs * xkc;
        }
        sq[p] = std::max(a - t * c, 0.0);
        sq[k] = b + t * c;
        auto jp = j.row(p);
        auto jk = j.row(k);
        for (std::size_t col = 0; col < r; ++col) {
          const double jpc = jp[col];
          const double jkc = jk[col];
          jp[col] = cs * jpc - sn * jkc;
          jk[col] = sn * jpc + cs * jkc;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep == kJacobiMaxSweeps) {
    std::ostringstream msg;
    msg << "dense_svd: Jacobi iteration did not converge after " << kJacobiMaxSweeps
        << " sweeps (largest relative off-diagonal " << worst << ")";
    throw NumericError(msg.str());
  }

  // j·lᵀ = diag(s)·y with orthonormal rows y, so w = Pᵀ·yᵀ·diag(s)·(j·q).
  std::vector<double> norms(r);
  for (std::size_t i = 0; i < r; ++i) norms[i] = norm2(x.row(i));
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  RowSvd out{Matrix(r, r), std::vector<double>(r), Matrix()};
  Matrix y(r, r);
  Matrix vr(r, r);
  std::vector<bool> valid(r, false);
  const double tiny = std::numeric_limits<double>::min() * static_cast<double>(r + 1);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t src = order[i];
    out.s[i] = norms[src];
    std::copy_n(j.row(src).begin(), r, vr.row(i).begin());
    if (norms[src] > tiny) {
      auto dst = y.row(i);
      auto from = x.row(src);
      for (std::size_t c = 0; c < r; ++c) dst[c] = from[c] / norms[src];
      valid[i] = true;
    }
  }
  complete_rows(y, valid);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t c = 0; c < r; ++c) out.ut(i, lq.perm[c]) = y(i, c);
  out.vt = lq.apply_q(vr);
  return out;
}

void check_finite(const Matrix& m, const char* who) {
  if (m.empty()) throw ShapeError(std::string(who) + ": empty matrix");
  if (!m.all_finite()) throw NumericError(std::string(who) + ": non-finite entries");
}

std::size_t retained_count(std::span<const double> s, std::size_t k, double rtol) {
  if (s.empty() || !(s[0] > 0.0)) return 0;
  const double floor = std::max(rtol, kMachineRankTol) * s[0];
  std::size_t n = 0;
  while (n < std::min(k, s.size()) && s[n] > 0.0 && s[n] >= floor &&
         s[n] > kMachineRankTol * s[0])
    ++n;
  return n;
}

SvdFactors truncate(SvdFactors f, std::size_t keep) {
  SvdFactors out;
  out.s.assign(f.s.begin(), f.s.begin() + static_cast<std::ptrdiff_t>(keep));
  out.u = Matrix(f.u.rows(), keep);
  for (std::size_t i = 0; i < f.u.rows(); ++i)
    for (std::size_t c = 0; c < keep; ++c) out.u(i, c) = f.u(i, c);
  out.vt = Matrix(keep, f.vt.cols());
  for (std::size_t c = 0; c < keep; ++c)
    std::copy_n(f.vt.row(c).begin(), f.vt.cols(), out.vt.row(c).begin());
  return out;
}

}  // namespace

LqFactors householder_lq(const Matrix& w) {
  CompactLq c = compact_lq(w);
  Matrix q = c.apply_q(Matrix::identity(w.rows()));
  return {std::move(c.l), std::move(q)};
}

namespace {

// Power-of-two exponent that brings the largest entry near 1, or 0 when the
// magnitude is already moderate. Scaling by 2^-e is exact.
int scale_exponent(const Matrix& m) {
  double top = 0.0;
  for (double v : m.values()) top = std::max(top, std::abs(v));
  if (top == 0.0 || (top > 0x1p-100 && top < 0x1p100)) return 0;
  return std::ilogb(top);
}

Matrix scaled(const Matrix& m, int e) {
  Matrix out = m;
  for (double& v : out.values()) v = std::ldexp(v, -e);
  return out;
}

SvdFactors unscale(SvdFactors f, int e) {
  for (double& v : f.s) v = std::ldexp(v, e);
  return f;
}

}  // namespace

SvdFactors dense_svd(const Matrix& m) {
  check_finite(m, "dense_svd");
  if (const int e = scale_exponent(m)) return unscale(dense_svd(scaled(m, e)), e);
  SvdFactors f;
  if (m.rows() <= m.cols()) {
    RowSvd rs = svd_of_rows(m);
    f.u = rs.ut.transposed();
    f.s = std::move(rs.s);
    f.vt = std::move(rs.vt);
  } else {
    RowSvd rs = svd_of_rows(m.transposed());
    f.u = rs.vt.transposed();
    f.s = std::move(rs.s);
    f.vt = std::move(rs.ut);
  }
  return f;
}

namespace {

// Sketch of width `width` with kPowerIterations passes, each followed by
// re-orthonormalization of both the column and row bases.
SvdFactors sketched_svd(const Matrix& m, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  Matrix omega_t(width, m.cols());
  for (double& v : omega_t.values()) v = rng.normal();

  // Rows of qt span the sketched column space of m.
  Matrix qt = householder_lq(matmul_nt(omega_t, m)).q;
  for (int it = 0; it < kPowerIterations; ++it) {
    Matrix pt = householder_lq(matmul(qt, m)).q;
    qt = householder_lq(matmul_nt(pt, m)).q;
  }
  SvdFactors small = dense_svd(matmul(qt, m));
  return {matmul_tn(qt, small.u), std::move(small.s), std::move(small.vt)};
}

}  // namespace

namespace {

void check_truncation_args(std::size_t k, double rtol, const char* who) {
  if (k < 1) throw ConfigError(std::string(who) + ": k must be at least 1");
  if (!(rtol >= 0.0 && rtol < 1.0)) throw ConfigError(std::string(who) + ": rtol must lie in [0, 1)");
}

// Truncated factors of m, either final (lq empty) or of the small triangular
// factor of the long side, still to be mapped back through lq.
struct Truncation {
  SvdFactors f;
  std::optional<CompactLq> lq;
  bool wide = true;
};

Truncation truncate_svd(const Matrix& m, std::size_t k, double rtol, std::uint64_t seed) {
  const std::size_t thin = std::min(m.rows(), m.cols());
  const std::size_t width = k + kOversampling;
  if (width < thin && thin > kCompressRatio * width) {
    SvdFactors full = sketched_svd(m, width, seed);
    const std::size_t keep = retained_count(full.s, k, rtol);
    return {truncate(std::move(full), keep), std::nullopt};
  }
  // Factor the long side once and decompose the small triangular factor,
  // exactly when the sketch would cover most of it.
  Truncation t;
  t.wide = m.rows() <= m.cols();
  t.lq = compact_lq(t.wide ? m : m.transposed());
  const Matrix small = t.wide ? t.lq->l : t.lq->l.transposed();
  SvdFactors f = 4 * width >= 3 * thin ? dense_svd(small) : sketched_svd(small, width, seed);
  const std::size_t keep = retained_count(f.s, k, rtol);
  t.f = truncate(std::move(f), keep);
  return t;
}

}  // namespace

SvdFactors randomized_truncated_svd(const Matrix& m, std::size_t k, double rtol,
                                    std::uint64_t seed) {
  check_truncation_args(k, rtol, "randomized_truncated_svd");
  check_finite(m, "randomized_truncated_svd");
  if (const int e = scale_exponent(m))
    return unscale(randomized_truncated_svd(scaled(m, e), k, rtol, seed), e);

  Truncation t = truncate_svd(m, k, rtol, seed);
  if (t.lq) {
    if (t.wide) {
      t.f.vt = t.lq->apply_q(t.f.vt);
    } else {
      t.f.u = t.lq->apply_q(t.f.u.transposed()).transposed();
    }
  }
  return std::move(t.f);
}

TruncatedSolve truncated_pinv_solve(const Matrix& m, std::span<const double> r, std::size_t k,
                                    double rtol, std::uint64_t seed) {
  check_truncation_args(k, rtol, "truncated_pinv_solve");
  if (r.size() != m.rows()) {
    throw ShapeError("truncated_pinv_solve: residual of length " + std::to_string(r.size()) +
                     " for " + std::to_string(m.rows()) + " rows");
  }
  check_finite(m, "truncated_pinv_solve");
  if (const int e = scale_exponent(m)) {
    TruncatedSolve out = truncated_pinv_solve(scaled(m, e), r, k, rtol, seed);
    for (double& v : out.x) v = std::ldexp(v, -e);
    for (double& v : out.s) v = std::ldexp(v, e);
    return out;
  }

  Truncation t = truncate_svd(m, k, rtol, seed);
  TruncatedSolve out;
  if (!t.lq) {
    out.x = pinv_apply(t.f, r);
  } else if (t.wide) {
    const auto y = pinv_apply(t.f, r);
    Matrix row(1, y.size());
    std::copy(y.begin(), y.end(), row.row(0).begin());
    const Matrix x = t.lq->apply_q(row);
    out.x.assign(x.row(0).begin(), x.row(0).end());
  } else {
    out.x = pinv_apply(t.f, t.lq->apply_qt(r));
  }
  out.s = std::move(t.f.s);
  return out;
}

std::vector<double> pinv_apply(const SvdFactors& f, std::span<const double> r) {
  if (r.size() != f.u.rows()) {
    throw ShapeError("pinv_apply: residual of length " + std::to_string(r.size()) +
                     " for factors with " + std::to_string(f.u.rows()) + " rows");
  }
  std::vector<double> out(f.vt.cols(), 0.0);
  const double top = f.s.empty() ? 0.0 : f.s[0];
  for (std::size_t i = 0; i < f.s.size(); ++i) {
    const double s = f.s[i];
    if (!(s > 0.0) || s < kMachineRankTol * top) continue;
    double proj = 0.0;
    for (std::size_t a = 0; a < f.u.rows(); ++a) proj += f.u(a, i) * r[a];
    const double coef = proj / s;
    if (coef == 0.0) continue;
    auto vi = f.vt.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += coef * vi[c];
  }
  return out;
}

Matrix pinv_matrix(const SvdFactors& f) {
  Matrix p(f.vt.cols(), f.u.rows());
  const double top = f.s.empty() ? 0.0 : f.s[0];
  for (std::size_t i = 0; i < f.s.size(); ++i) {
    const double s = f.s[i];
    if (!(s > 0.0) || s < kMachineRankTol * top) continue;
    for (std::size_t c = 0; c < p.rows(); ++c) {
      const double vc = f.vt(i, c) / s;
      for (std::size_t a = 0; a < p.cols(); ++a) p(c, a) += vc * f.u(a, i);
    }
  }
  return p;
}

std::vector<double> solve_spd(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw ShapeError("solve_spd: dimension mismatch");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
    if (!(d > 0.0)) throw NumericError("solve_spd: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t p = 0; p < j; ++p) v -= l(i, p) * l(j, p);
      l(i, j) = v / l(j, j);
    }
  }
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < i; ++p) y[i] -= l(i, p) * y[p];
    y[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t p = i + 1; p < n; ++p) y[i] -= l(p, i) * y[p];
    y[i] /= l(i, i);
  }
  return y;
}

}  // namespace sven::linalg
