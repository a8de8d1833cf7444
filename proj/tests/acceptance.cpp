// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments are
// substrings; only criteria whose name contains one of them are run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "sven/harness.hpp"
#include "sven/linalg.hpp"
#include "sven/loss.hpp"
#include "sven/mlp.hpp"
#include "sven/optim.hpp"

namespace {

using namespace sven;
using sven::testing::least_squares_solution;
using sven::testing::min_norm_solution;
using sven::testing::random_matrix;
using sven::testing::random_vector;
using sven::testing::rel_diff;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Columns with orthonormal columns via modified Gram-Schmidt.
Matrix orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix q = random_matrix(rows, cols, rng);
  for (std::size_t j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < j; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += q(i, p) * q(i, j);
        for (std::size_t i = 0; i < rows; ++i) q(i, j) -= s * q(i, p);
      }
    double n = 0.0;
    for (std::size_t i = 0; i < rows; ++i) n += q(i, j) * q(i, j);
    n = std::sqrt(n);
    for (std::size_t i = 0; i < rows; ++i) q(i, j) /= n;
  }
  return q;
}

// u · diag(s) · vᵀ
Matrix compose(const Matrix& u, std::span<const double> s, const Matrix& v) {
  Matrix us = u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) us(i, j) *= s[j];
  return matmul_nt(us, v);
}

double rel_sv_error(std::span<const double> got, std::span<const double> want, std::size_t k) {
  if (got.size() < k || want.size() < k) return std::numeric_limits<double>::infinity();
  double e = 0.0;
  for (std::size_t i = 0; i < k; ++i) e = std::max(e, std::abs(got[i] - want[i]) / want[i]);
  return e;
}

std::vector<double> sven_delta(std::span<const double> r, const Matrix& m,
                               const optim::SvenConfig& cfg, std::uint64_t stream = 0) {
  std::vector<double> theta(m.cols(), 0.0);
  optim::sven_step(r, m, cfg, theta, {}, stream);
  return theta;
}

optim::SvenConfig exact_cfg(std::size_t k, double eta = 1.0) {
  optim::SvenConfig c;
  c.eta = eta;
  c.k = k;
  c.rtol = 0.0;
  return c;
}

Outcome penrose() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng.below(32), cols = 1 + rng.below(64);
    Matrix a = random_matrix(rows, cols, rng);
    if (trial % 5 == 4 && std::min(rows, cols) > 2) {
      const std::size_t r = 1 + rng.below(std::min(rows, cols) - 1);
      a = matmul(random_matrix(rows, r, rng), random_matrix(r, cols, rng));
    }
    const Matrix p = linalg::pinv_matrix(linalg::dense_svd(a));
    const Matrix ap = matmul(a, p), pa = matmul(p, a);
    worst = std::max({worst, frobenius_norm(matmul(ap, a) - a), frobenius_norm(matmul(pa, p) - p),
                      frobenius_norm(ap.transposed() - ap), frobenius_norm(pa.transposed() - pa)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 10.0, fmt("max Penrose residual %.3g, %.2f s", worst, secs)};
}

Outcome randomized_fidelity() {
  Rng rng(202);
  double exact_err = 0.0;
  struct Shape {
    std::size_t rows, cols, rank;
  };
  for (const Shape sh : {Shape{16, 64, 3}, Shape{64, 1024, 8}, Shape{1024, 64, 8},
                         Shape{40, 300, 5}, Shape{64, 96, 8}, Shape{32, 256, 1}}) {
    const Matrix a = matmul(random_matrix(sh.rows, sh.rank, rng),
                            random_matrix(sh.rank, sh.cols, rng));
    const auto want = linalg::dense_svd(a).s;
    const auto got = linalg::randomized_truncated_svd(a, sh.rank, 0.0, rng.next()).s;
    exact_err = std::max(exact_err, rel_sv_error(got, want, sh.rank));
  }
  double decay_err = 0.0;
  for (const Shape sh : {Shape{64, 1024, 8}, Shape{64, 1024, 16}, Shape{200, 48, 8},
                         Shape{32, 512, 4}}) {
    const std::size_t r = std::min(sh.rows, sh.cols);
    std::vector<double> s(r);
    for (std::size_t i = 0; i < r; ++i) s[i] = std::pow(0.7, static_cast<double>(i));
    const Matrix a = compose(orthonormal_columns(sh.rows, r, rng), s,
                             orthonormal_columns(sh.cols, r, rng));
    const auto got = linalg::randomized_truncated_svd(a, sh.rank, 0.0, rng.next()).s;
    decay_err = std::max(decay_err, rel_sv_error(got, s, sh.rank));
  }
  return {exact_err <= 1e-8 && decay_err <= 1e-4,
          fmt("exact-rank rel err %.3g, decaying top-k rel err %.3g", exact_err, decay_err)};
}

Outcome jacobian_exactness() {
  Rng rng(303);
  const double h = 1e-4;
  double worst = 0.0;
  for (int model_i = 0; model_i < 20; ++model_i) {
    const std::size_t d_in = 1 + rng.below(4);
    const std::vector<std::size_t> hidden{2 + rng.below(7), 2 + rng.below(7), 2 + rng.below(7)};
    for (auto kind : {loss::LossKind::L2Signed, loss::LossKind::LabelRegression,
                      loss::LossKind::CrossEntropy}) {
      const std::size_t d_out = kind == loss::LossKind::L2Signed ? 1 : 3;
      const std::size_t n = 6;
      Split s{random_matrix(n, d_in, rng), random_matrix(n, d_out, rng), {}};
      if (kind == loss::LossKind::CrossEntropy)
        for (std::size_t i = 0; i < n; ++i) s.labels.push_back(static_cast<int>(rng.below(3)));
      auto model = net::init_mlp({d_in, hidden[0], hidden[1], hidden[2], d_out}, rng.next());
      const auto idx = iota(n), all = iota(model.num_params());
      const loss::LossSpec spec{kind, 2.0};
      const auto rb = loss::residual_jacobian(spec, model, Batch{s, idx}, 1, all);
      for (std::size_t p = 0; p < model.num_params(); ++p) {
        const double keep = model.theta[p];
        model.theta[p] = keep + h;
        const auto up = loss::residual_jacobian(spec, model, Batch{s, idx}, 1, all).residuals;
        model.theta[p] = keep - h;
        const auto dn = loss::residual_jacobian(spec, model, Batch{s, idx}, 1, all).residuals;
        model.theta[p] = keep;
        for (std::size_t c = 0; c < rb.residuals.size(); ++c) {
          const double fd = (up[c] - dn[c]) / (2 * h);
          worst = std::max(worst, std::abs(rb.jacobian(c, p) - fd) / (1.0 + std::abs(fd)));
        }
      }
    }
  }
  return {worst <= 1e-5, fmt("max relative error %.3g over 60 model/loss pairs", worst)};
}

Outcome natgrad_reduction() {
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Split s{random_matrix(32, 4, rng), random_matrix(32, 1, rng), {}};
    const auto model = net::init_mlp({4, 1}, rng.next());
    const auto rb = loss::residual_jacobian({loss::LossKind::L2Signed}, model,
                                            Batch{s, iota(32)}, 1, iota(5));
    const double eta = rng.uniform(0.05, 1.0);
    auto a = model.theta, b = model.theta;
    optim::sven_step(rb.residuals, rb.jacobian, exact_cfg(32, eta), a);
    optim::natgrad_step(rb.residuals, rb.jacobian, eta, b);
    std::vector<double> da(5), db(5);
    for (std::size_t i = 0; i < 5; ++i) {
      da[i] = a[i] - model.theta[i];
      db[i] = b[i] - model.theta[i];
    }
    worst = std::max(worst, rel_diff(da, db));
  }
  return {worst <= 1e-6, fmt("max relative difference %.3g over 100 instances", worst)};
}

Outcome least_squares_step() {
  Rng rng(505);
  double worst = 0.0;
  struct Case {
    std::size_t d, b;
  };
  for (int trial = 0; trial < 20; ++trial) {
    for (const Case cs : {Case{5, 32}, Case{3, 8}, Case{8, 4}}) {
      Split s{random_matrix(cs.b, cs.d, rng), random_matrix(cs.b, 1, rng), {}};
      auto model = net::init_mlp({cs.d, 1}, rng.next());
      const std::size_t n = model.num_params();
      const auto rb = loss::residual_jacobian({loss::LossKind::L2Signed}, model,
                                              Batch{s, iota(cs.b)}, 1, iota(n));
      optim::sven_step(rb.residuals, rb.jacobian, exact_cfg(std::min(cs.b, n)), model.theta);
      const double after = loss::mean_loss({loss::LossKind::L2Signed}, model, s);
      double best = 0.0;
      if (cs.b > n) {
        Matrix design(cs.b, cs.d + 1, 1.0);
        for (std::size_t i = 0; i < cs.b; ++i)
          for (std::size_t j = 0; j < cs.d; ++j) design(i, j) = s.inputs(i, j);
        const auto w = least_squares_solution(design, s.targets.values());
        const auto fit = matvec(design, w);
        for (std::size_t i = 0; i < cs.b; ++i)
          best += (fit[i] - s.targets(i, 0)) * (fit[i] - s.targets(i, 0));
        best /= static_cast<double>(cs.b);
      }
      worst = std::max(worst, std::abs(after - best));
    }
  }
  return {worst <= 1e-8, fmt("max |loss - normal-equations minimum| %.3g", worst)};
}

Outcome invariances() {
  Rng rng(606);
  double scale_err = 0.0, sign_err = 0.0, norm_err = 0.0;
  struct Shape {
    std::size_t rows, cols, k;
  };
  for (int trial = 0; trial < 10; ++trial) {
    for (const Shape sh : {Shape{8, 40, 8}, Shape{16, 200, 6}, Shape{32, 593, 16}, Shape{12, 5, 5}}) {
      const Matrix m = random_matrix(sh.rows, sh.cols, rng);
      const auto r = random_vector(sh.rows, rng);
      optim::SvenConfig cfg;
      cfg.eta = 0.7;
      cfg.k = sh.k;
      cfg.rtol = 1e-6;
      cfg.seed = rng.next();
      const auto base = sven_delta(r, m, cfg);

      const double c = std::exp(rng.uniform(-3.0, 3.0));
      std::vector<double> rc(r);
      for (double& v : rc) v *= c;
      scale_err = std::max(scale_err, rel_diff(sven_delta(rc, c * m, cfg), base));

      Matrix ms = m;
      std::vector<double> rs(r);
      for (std::size_t i = 0; i < sh.rows; ++i)
        if (rng.below(2)) {
          rs[i] = -rs[i];
          for (double& v : ms.row(i)) v = -v;
        }
      sign_err = std::max(sign_err, rel_diff(sven_delta(rs, ms, cfg), base));

      if (sh.rows <= sh.cols) {
        const auto d = sven_delta(r, m, exact_cfg(sh.rows));
        norm_err = std::max(norm_err, rel_diff(min_norm_solution(m, matvec(m, d)), d));
      }
    }
  }
  const bool ok = scale_err <= 1e-10 && sign_err <= 1e-10 && norm_err <= 1e-10;
  return {ok, fmt("scale %.3g, row sign %.3g, minimum norm %.3g", scale_err, sign_err, norm_err)};
}

Outcome exponential_decay() {
  // Inputs are cosine features 1..7 on a uniform grid; together with the bias
  // they span an orthonormal basis of the first eight cosines.
  const std::size_t b = 64, d = 7;
  Split s{Matrix(b, d), Matrix(b, 1), {}};
  Rng rng(707);
  std::vector<double> beta(d + 1);
  for (double& v : beta) v = rng.normal();
  for (std::size_t i = 0; i < b; ++i) {
    double y = beta[0] / std::sqrt(static_cast<double>(b));
    for (std::size_t j = 1; j <= d; ++j) {
      const double phi = std::sqrt(2.0 / b) * std::cos(std::numbers::pi * j * (i + 0.5) / b);
      s.inputs(i, j - 1) = phi;
      y += beta[j] * phi;
    }
    s.targets(i, 0) = y;
  }
  auto model = net::init_mlp({d, 1}, 708);
  const double eta = 0.01;
  const loss::LossSpec spec{loss::LossKind::L2Signed};
  const auto idx = iota(b), all = iota(model.num_params());
  std::vector<double> losses{loss::mean_loss(spec, model, s)};
  for (int step = 0; step < 50; ++step) {
    const auto rb = loss::residual_jacobian(spec, model, Batch{s, idx}, 1, all);
    optim::natgrad_step(rb.residuals, rb.jacobian, eta, model.theta);
    losses.push_back(loss::mean_loss(spec, model, s));
  }
  std::vector<double> ratios;
  for (std::size_t t = 1; t < losses.size(); ++t) ratios.push_back(losses[t] / losses[t - 1]);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  const double spread = (*hi - *lo) / *lo;

  const double n = static_cast<double>(losses.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    const double x = static_cast<double>(t), y = std::log(losses[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  const double r2 = cov * cov / (vx * vy);
  // One step of size eta advances the continuous flow by eta/2.
  const double rate = -(cov / vx) / (eta / 2);
  return {spread <= 0.01 && r2 >= 0.999,
          fmt("ratio spread %.3g, R^2 %.6f, decay rate %.4f per unit time", spread, r2, rate)};
}

struct ReproState {
  bool ran = false;
  harness::ScanResult sven_seed0;
};
ReproState g_repro;

harness::Grid sven_grid() {
  return {{"eta", {"0.05", "0.1", "0.5", "1"}},
          {"k", {"1", "2", "4", "8", "16", "32"}},
          {"rtol", {"1e-4", "1e-3", "1e-2"}}};
}

double best_loss(const harness::ScanResult& res) {
  return res.best ? res.records[*res.best].final_val_loss()
                  : std::numeric_limits<double>::infinity();
}

Outcome reproduction_1d() {
  const auto t0 = Clock::now();
  std::string detail;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    harness::RunConfig base;
    base.dataset = data::DatasetKind::Sine1d;
    base.seed_model = seed;
    auto sven_res = harness::grid_scan(base, sven_grid());
    const double sven_best = best_loss(sven_res);

    double other_best = std::numeric_limits<double>::infinity();
    std::string other_name;
    for (const char* opt : {"sgd", "rmsprop", "adam"}) {
      auto b = base;
      b.optimizer = optim::parse_optimizer_kind(opt);
      const auto res = harness::grid_scan(b, {{"eta", {"1e-4", "1e-3", "1e-2", "1e-1"}}});
      if (best_loss(res) < other_best) {
        other_best = best_loss(res);
        other_name = std::string(opt) + "@" + harness::format_double(res.points[*res.best].eta);
      }
    }
    auto polyak = base;
    polyak.optimizer = optim::OptimizerKind::PolyakSgd;
    const auto prec = harness::train_run(harness::resolve(polyak));
    if (!prec.diverged && prec.final_val_loss() < other_best) {
      other_best = prec.final_val_loss();
      other_name = "polyak";
    }
    const auto& bp = sven_res.points[*sven_res.best];
    wins += sven_best < other_best ? 1 : 0;
    detail += fmt("%sseed %d: sven %.3g (eta %g k %zu rtol %g) vs %s %.3g", seed ? "; " : "",
                  static_cast<int>(seed), sven_best, bp.eta, bp.k, bp.rtol, other_name.c_str(),
                  other_best);
    if (seed == 0) {
      g_repro.sven_seed0 = std::move(sven_res);
      g_repro.ran = true;
    }
  }
  const double secs = seconds_since(t0);
  detail += fmt("; %d/3 seeds, %.0f s", wins, secs);
  return {wins == 3 && secs <= 15 * 60.0, detail};
}

Outcome k_sensitivity() {
  if (!g_repro.ran) {
    harness::RunConfig base;
    base.dataset = data::DatasetKind::Sine1d;
    g_repro.sven_seed0 = harness::grid_scan(base, sven_grid());
    g_repro.ran = true;
  }
  const auto& res = g_repro.sven_seed0;
  if (!res.best) return {false, "no converged Sven run"};
  const auto& bp = res.points[*res.best];
  const harness::RunRecord* k1 = nullptr;
  const harness::RunRecord* k16 = nullptr;
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    const auto& p = res.points[i];
    if (p.eta != bp.eta || p.rtol != bp.rtol) continue;
    if (p.k == 1) k1 = &res.records[i];
    if (p.k == 16) k16 = &res.records[i];
  }
  if (!k1 || !k16) return {false, "grid lacks k = 1 or k = 16"};
  double k1_min = k1->initial_val_loss;
  for (const auto& e : k1->epochs) k1_min = std::min(k1_min, e.val_loss);
  if (k1->diverged) k1_min = k1->initial_val_loss;
  const double k1_frac = k1_min / k1->initial_val_loss;
  const double k16_gain = k16->initial_val_loss / k16->final_val_loss();
  return {k1_frac >= 0.5 && k16_gain >= 10.0,
          fmt("eta %g rtol %g: k=1 best val / epoch-0 %.3g, k=16 improvement %.3gx", bp.eta,
              bp.rtol, k1_frac, k16_gain)};
}

Outcome single_condition() {
  Rng rng(909);
  double cos_err = 0.0, polyak_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d_in = 1 + rng.below(4), d_out = 1 + rng.below(3), bsz = 32;
    Split s{random_matrix(bsz, d_in, rng), random_matrix(bsz, d_out, rng), {}};
    const auto model = net::init_mlp({d_in, 16, 16, 16, d_out}, rng.next());
    const loss::LossSpec spec{loss::LossKind::LabelRegression, 2.0};
    const auto idx = iota(bsz);
    const auto rb = loss::residual_jacobian(spec, model, Batch{s, idx}, bsz,
                                            iota(model.num_params()));
    if (rb.residuals.size() != 1) return {false, "micro-batch of B did not give one condition"};
    optim::SvenConfig cfg;
    cfg.eta = 1.0;
    cfg.micro_batch_size = bsz;
    const auto d = sven_delta(rb.residuals, rb.jacobian, cfg);
    const auto lg = loss::mean_loss_and_grad(spec, model, Batch{s, idx});
    const double cosine = dot(d, lg.grad) / (norm2(d) * norm2(lg.grad));
    cos_err = std::max(cos_err, std::abs(cosine + 1.0));
    // Analytic Polyak step at target loss 0, without the library's denominator guard.
    const double step = lg.loss / dot(lg.grad, lg.grad);
    std::vector<double> polyak(lg.grad);
    for (double& v : polyak) v *= -step;
    polyak_err = std::max(polyak_err, rel_diff(d, polyak));
  }
  return {cos_err <= 1e-10 && polyak_err <= 1e-10,
          fmt("|cosine + 1| %.3g, relative distance to Polyak step %.3g", cos_err, polyak_err)};
}

Outcome param_batching() {
  harness::RunConfig base;
  base.dataset = data::DatasetKind::Poly6;
  base.standardize_targets = true;
  // Working point: best full-parameter Sven run on model seed 0.
  const auto scan = harness::grid_scan(base, {{"eta", {"0.05", "0.1", "0.5"}}, {"k", {"16", "32"}}});
  if (!scan.best) return {false, "no converged full-parameter run"};
  const auto point = scan.points[*scan.best];
  const auto ds = harness::make_dataset(point);

  double full = 0.0, half = 0.0;
  int diverged = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cfg = point;
    cfg.seed_model = seed;
    const auto a = harness::train_run(cfg, ds);
    cfg.param_fraction = 0.5;
    const auto b = harness::train_run(cfg, ds);
    diverged += a.diverged + b.diverged;
    full += a.final_val_loss() / 10.0;
    half += b.final_val_loss() / 10.0;
  }
  return {diverged == 0 && half <= 2.0 * full,
          fmt("eta %g k %zu: mean final val loss full %.4g, fraction 0.5 %.4g (ratio %.3g), "
              "%d diverged",
              point.eta, point.k, full, half, half / full, diverged)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sven_acceptance_determinism";
  fs::remove_all(root);
  int mismatches = 0, runs = 0;
  std::vector<harness::RunConfig> cfgs;
  {
    harness::RunConfig c;
    c.n_samples = 2000;
    c.epochs = 3;
    c.seed_model = 5;
    c.seed_data = 6;
    c.seed_opt = 7;
    cfgs.push_back(c);
    c.micro_batch = 2;
    c.param_fraction = 0.6;
    cfgs.push_back(c);
    c = cfgs.front();
    c.dataset = data::DatasetKind::Poly6;
    cfgs.push_back(c);
    c.optimizer = optim::OptimizerKind::Adam;
    c.eta = 1e-2;
    cfgs.push_back(c);
    c.optimizer = optim::OptimizerKind::Lbfgs;
    c.eta = 0.5;
    cfgs.push_back(c);
  }
  for (const auto& c : cfgs) {
    const auto cfg = harness::resolve(c);
    std::string metrics[2], spectra[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / (std::to_string(runs) + "_" + std::to_string(rep));
      harness::emit_metrics(harness::train_run(cfg), dir);
      metrics[rep] = slurp(dir / "metrics.csv");
      spectra[rep] = slurp(dir / "spectra.csv");
    }
    // cum_wall_s is the last column and measures elapsed time.
    if (drop_last_column(metrics[0]) != drop_last_column(metrics[1])) ++mismatches;
    if (spectra[0] != spectra[1]) ++mismatches;
    ++runs;
  }
  fs::remove_all(root);
  return {mismatches == 0,
          fmt("%d repeated runs, %d file mismatches (wall-clock column excluded)", runs, mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pseudoinverse_penrose", penrose},
      {"randomized_svd_fidelity", randomized_fidelity},
      {"jacobian_exactness", jacobian_exactness},
      {"natgrad_reduction", natgrad_reduction},
      {"one_step_least_squares", least_squares_step},
      {"invariance_suite", invariances},
      {"exponential_decay", exponential_decay},
      {"single_condition_limit", single_condition},
      {"determinism", determinism},
      {"param_batching_poly6", param_batching},
      {"regression_1d_reproduction", reproduction_1d},
      {"k_sensitivity", k_sensitivity},
  };
  std::vector<std::string> filters(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!filters.empty() &&
        std::none_of(filters.begin(), filters.end(),
                     [&](const std::string& f) { return name.find(f) != std::string::npos; }))
      continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
