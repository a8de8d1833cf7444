#include "sven/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sven/error.hpp"
#include "sven/linalg.hpp"

namespace sven::optim {

namespace {

void require_finite(std::span<const double> v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericError(std::string(who) + ": non-finite input");
}

void check_mask(std::span<const std::size_t> mask, std::size_t width, std::size_t n_theta,
                const char* who) {
  if (mask.empty()) {
    if (width != n_theta)
      throw ShapeError(std::string(who) + ": Jacobian has " + std::to_string(width) +
                       " columns for " + std::to_string(n_theta) + " parameters");
    return;
  }
  if (mask.size() != width)
    throw ShapeError(std::string(who) + ": mask size does not match the Jacobian width");
  for (std::size_t i : mask)
    if (i >= n_theta) throw ShapeError(std::string(who) + ": mask index out of range");
}

void apply_delta(std::span<const double> delta, double eta, std::span<double> theta,
                 std::span<const std::size_t> mask) {
  for (std::size_t c = 0; c < delta.size(); ++c) {
    const std::size_t i = mask.empty() ? c : mask[c];
    theta[i] -= eta * delta[c];
  }
}

void ensure_size(std::vector<double>& buf, std::size_t n) {
  if (buf.empty()) buf.assign(n, 0.0);
  if (buf.size() != n) throw ShapeError("optimizer state does not match the parameter count");
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sven: return "sven";
    case OptimizerKind::NatGrad: return "natgrad";
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::PolyakSgd: return "polyak";
    case OptimizerKind::RmsProp: return "rmsprop";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::Lbfgs: return "lbfgs";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (auto k : {OptimizerKind::Sven, OptimizerKind::NatGrad, OptimizerKind::Sgd,
                 OptimizerKind::PolyakSgd, OptimizerKind::RmsProp, OptimizerKind::Adam,
                 OptimizerKind::Lbfgs})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void SvenConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("sven: eta must be > 0");
  if (k < 1) throw ConfigError("sven: k must be >= 1");
  if (!(rtol >= 0.0 && rtol < 1.0)) throw ConfigError("sven: rtol must lie in [0, 1)");
  if (!(kappa > 0.0)) throw ConfigError("sven: kappa must be > 0");
  if (micro_batch_size < 1) throw ConfigError("sven: micro-batch size must be >= 1");
  if (!(param_fraction > 0.0 && param_fraction <= 1.0))
    throw ConfigError("sven: parameter fraction must lie in (0, 1]");
}

std::vector<double> sven_step(std::span<const double> residuals, const Matrix& jacobian,
                              const SvenConfig& cfg, std::span<double> theta,
                              std::span<const std::size_t> mask, std::uint64_t stream) {
  cfg.validate();
  if (residuals.size() != jacobian.rows())
    throw ShapeError("sven_step: " + std::to_string(residuals.size()) + " residuals for " +
                     std::to_string(jacobian.rows()) + " Jacobian rows");
  check_mask(mask, jacobian.cols(), theta.size(), "sven_step");
  require_finite(residuals, "sven_step residuals");

  auto sol = linalg::truncated_pinv_solve(jacobian, residuals, cfg.k, cfg.rtol,
                                         derive_seed(cfg.seed, stream));
  if (sol.s.empty()) return {};
  apply_delta(sol.x, cfg.eta, theta, mask);
  return std::move(sol.s);
}

std::vector<std::size_t> sample_param_mask(std::size_t n, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("parameter fraction must lie in (0, 1]");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (fraction == 1.0) return idx;
  // Guard against 0.3*10 = 3.0000000000000004 rounding up.
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void natgrad_step(std::span<const double> residuals, const Matrix& jacobian, double eta,
                  std::span<double> theta, std::span<const std::size_t> mask) {
  if (residuals.size() != jacobian.rows()) throw ShapeError("natgrad_step: residual length");
  check_mask(mask, jacobian.cols(), theta.size(), "natgrad_step");
  if (jacobian.rows() < jacobian.cols()) {
    throw ConfigError("natgrad_step: " + std::to_string(jacobian.rows()) + " conditions for " +
                      std::to_string(jacobian.cols()) +
                      " parameters; the metric is singular in the over-parametrized regime, "
                      "use the sven optimizer instead");
  }
  require_finite(residuals, "natgrad_step residuals");
  require_finite(jacobian.values(), "natgrad_step jacobian");

  const auto s = linalg::dense_svd(jacobian).s;
  const double smin = s.back();
  if (!(smin > 0.0) || (s.front() / smin) * (s.front() / smin) > kNatGradMaxCondition) {
    throw NumericError("natgrad_step: metric MᵀM is singular or ill-conditioned; use the sven "
                       "optimizer instead");
  }
  const Matrix metric = matmul_tn(jacobian, jacobian);
  const auto delta = linalg::solve_spd(metric, matvec_t(jacobian, residuals));
  apply_delta(delta, eta, theta, mask);
}

void sgd_step(std::span<const double> grad, double eta, std::span<double> theta) {
  if (grad.size() != theta.size()) throw ShapeError("sgd_step: gradient length");
  require_finite(grad, "sgd_step");
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * grad[i];
}

void polyak_sgd_step(std::span<const double> grad, double loss, std::span<double> theta) {
  if (grad.size() != theta.size()) throw ShapeError("polyak_sgd_step: gradient length");
  require_finite(grad, "polyak_sgd_step");
  const double step = loss / (dot(grad, grad) + kPolyakEps);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * grad[i];
}

void rmsprop_step(std::span<const double> grad, MomentState& state, double eta,
                  std::span<double> theta) {
  if (grad.size() != theta.size()) throw ShapeError("rmsprop_step: gradient length");
  require_finite(grad, "rmsprop_step");
  ensure_size(state.v, theta.size());
  ++state.step;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.v[i] = kRmsPropRho * state.v[i] + (1.0 - kRmsPropRho) * grad[i] * grad[i];
    theta[i] -= eta * grad[i] / (std::sqrt(state.v[i]) + kRmsPropEps);
  }
}

void adam_step(std::span<const double> grad, MomentState& state, double eta,
               std::span<double> theta) {
  if (grad.size() != theta.size()) throw ShapeError("adam_step: gradient length");
  require_finite(grad, "adam_step");
  ensure_size(state.m, theta.size());
  ensure_size(state.v, theta.size());
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * grad[i];
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= eta * mhat / (std::sqrt(vhat) + kAdamEps);
  }
}

}  // namespace sven::optim
