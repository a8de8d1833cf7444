#include "sven/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "sven/linalg.hpp"
#include "sven/loss.hpp"
#include "sven/mlp.hpp"
#include "sven/optim.hpp"
#include "sven/rng.hpp"

namespace sven {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

bool check_pinv(std::ostream&) {
  Rng rng(11);
  const Matrix a = gaussian(12, 40, rng);
  const Matrix p = linalg::pinv_matrix(linalg::dense_svd(a));
  return max_abs_diff(matmul(matmul(a, p), a), a) < 1e-10 &&
         max_abs_diff(matmul(matmul(p, a), p), p) < 1e-10;
}

bool check_randomized(std::ostream&) {
  Rng rng(12);
  const Matrix a = matmul(gaussian(30, 4, rng), gaussian(4, 200, rng));
  const auto full = linalg::dense_svd(a);
  const auto approx = linalg::randomized_truncated_svd(a, 4, 0.0, 5);
  if (approx.s.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(approx.s[i] - full.s[i]) > 1e-8 * full.s[0]) return false;
  return true;
}

bool check_gradient(std::ostream&) {
  const auto model = net::init_mlp({3, 5, 5, 2}, 3);
  const std::vector<double> x{0.3, -0.7, 1.1};
  const std::vector<double> cot{1.0, -0.5};
  const auto fwd = net::forward(model, x);
  const auto g = net::grad_scalar(model, fwd.tape, cot);
  auto probe = model;
  const double h = 1e-6;
  for (std::size_t p = 0; p < model.num_params(); p += 7) {
    probe.theta[p] = model.theta[p] + h;
    const auto up = net::predict(probe, x);
    probe.theta[p] = model.theta[p] - h;
    const auto dn = net::predict(probe, x);
    probe.theta[p] = model.theta[p];
    const double fd = ((up[0] - dn[0]) * cot[0] + (up[1] - dn[1]) * cot[1]) / (2 * h);
    if (std::abs(fd - g[p]) > 1e-6 * std::max(1.0, std::abs(fd))) return false;
  }
  return true;
}

bool check_one_step_least_squares(std::ostream&) {
  // Linear residuals r(θ) = Aθ − b with B < N: one full-rank step at η = 1
  // reaches zero residual.
  Rng rng(13);
  const Matrix a = gaussian(6, 20, rng);
  std::vector<double> b(6), theta(20, 0.0);
  for (double& v : b) v = rng.normal();
  std::vector<double> r(6);
  for (std::size_t i = 0; i < 6; ++i) r[i] = -b[i];
  optim::SvenConfig cfg;
  cfg.eta = 1.0;
  cfg.k = 6;
  cfg.rtol = 0.0;
  optim::sven_step(r, a, cfg, theta);
  const auto after = matvec(a, theta);
  for (std::size_t i = 0; i < 6; ++i)
    if (std::abs(after[i] - b[i]) > 1e-9) return false;
  return true;
}

bool check_sven_natgrad_agree(std::ostream&) {
  Rng rng(14);
  const Matrix j = gaussian(20, 5, rng);
  std::vector<double> r(20);
  for (double& v : r) v = rng.normal();
  std::vector<double> t1(5, 0.0), t2(5, 0.0);
  optim::SvenConfig cfg;
  cfg.eta = 0.3;
  cfg.k = 5;
  cfg.rtol = 0.0;
  optim::sven_step(r, j, cfg, t1);
  optim::natgrad_step(r, j, 0.3, t2);
  for (std::size_t i = 0; i < 5; ++i)
    if (std::abs(t1[i] - t2[i]) > 1e-10) return false;
  return true;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::pair<const char*, std::function<bool(std::ostream&)>> checks[] = {
      {"pseudo-inverse identities", check_pinv},
      {"randomized svd on exact low rank", check_randomized},
      {"mlp gradient vs finite differences", check_gradient},
      {"one-step least squares", check_one_step_least_squares},
      {"sven matches natgrad when overdetermined", check_sven_natgrad_agree},
  };
  bool ok = true;
  for (const auto& [name, fn] : checks) {
    bool pass = false;
    try {
      pass = fn(out);
    } catch (const std::exception& e) {
      out << "  error: " << e.what() << '\n';
    }
    out << (pass ? "PASS " : "FAIL ") << name << '\n';
    ok = ok && pass;
  }
  return ok;
}

}  // namespace sven
