#include "sven/lbfgs.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "sven/error.hpp"
#include "sven/matrix.hpp"

namespace sven::optim {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Minimizer of the cubic matching values and slopes at x1 and x2, clamped to
// [lo, hi]; bisection when the cubic has no real minimizer.
double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2,
                         double lo, double hi) {
  const double d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
  const double d2_sq = d1 * d1 - g1 * g2;
  if (d2_sq >= 0.0) {
    const double d2 = std::sqrt(d2_sq);
    const double pos = x1 <= x2 ? x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2))
                                : x1 - (x1 - x2) * ((g1 + d2 - d1) / (g1 - g2 + 2.0 * d2));
    if (std::isfinite(pos)) return std::min(std::max(pos, lo), hi);
  }
  return 0.5 * (lo + hi);
}

double cubic_interpolate(double x1, double f1, double g1, double x2, double f2, double g2) {
  return cubic_interpolate(x1, f1, g1, x2, f2, g2, std::min(x1, x2), std::max(x1, x2));
}

struct Point {
  double t;
  double f;
  std::vector<double> g;
  double gtd;
};

struct LineSearchResult {
  Point best;
  int evaluations;
  bool converged;
};

// Bracketing followed by zoom, as in Nocedal & Wright Alg. 3.5/3.6.
LineSearchResult strong_wolfe(const Objective& objective, std::span<const double> x, double t,
                              std::span<const double> d, double f, std::span<const double> g,
                              double gtd, const LbfgsConfig& cfg) {
  const double d_norm = max_abs(d);
  std::vector<double> trial(x.size());
  auto evaluate = [&](double step) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * d[i];
    Point p{step, 0.0, std::vector<double>(x.size()), 0.0};
    p.f = objective(trial, p.g);
    p.gtd = dot(p.g, d);
    return p;
  };

  Point prev{0.0, f, std::vector<double>(g.begin(), g.end()), gtd};
  Point cur = evaluate(t);
  int evals = 1;
  int iter = 0;
  bool done = false;
  std::array<Point, 2> bracket;
  bool have_bracket = false;

  while (iter < cfg.max_line_search) {
    if (!std::isfinite(cur.f) || cur.f > f + cfg.c1 * cur.t * gtd ||
        (iter > 1 && cur.f >= prev.f)) {
      bracket = {prev, cur};
      have_bracket = true;
      break;
    }
    if (std::abs(cur.gtd) <= -cfg.c2 * gtd) {
      bracket = {cur, cur};
      have_bracket = true;
      done = true;
      break;
    }
    if (cur.gtd >= 0.0) {
      bracket = {prev, cur};
      have_bracket = true;
      break;
    }
    const double lo = cur.t + 0.01 * (cur.t - prev.t);
    const double hi = cur.t * 10.0;
    const double next = cubic_interpolate(prev.t, prev.f, prev.gtd, cur.t, cur.f, cur.gtd, lo, hi);
    prev = std::move(cur);
    cur = evaluate(next);
    ++evals;
    ++iter;
  }
  if (!have_bracket) {
    bracket = {Point{0.0, f, std::vector<double>(g.begin(), g.end()), gtd}, cur};
  }

  bool insufficient = false;
  int low = bracket[0].f <= bracket[1].f ? 0 : 1;
  int high = 1 - low;
  while (!done && iter < cfg.max_line_search) {
    if (std::abs(bracket[1].t - bracket[0].t) * d_norm < cfg.tolerance_change) break;
    double step = cubic_interpolate(bracket[0].t, bracket[0].f, bracket[0].gtd, bracket[1].t,
                                    bracket[1].f, bracket[1].gtd);
    const double bmax = std::max(bracket[0].t, bracket[1].t);
    const double bmin = std::min(bracket[0].t, bracket[1].t);
    const double eps = 0.1 * (bmax - bmin);
    if (std::min(bmax - step, step - bmin) < eps) {
      if (insufficient || step >= bmax || step <= bmin) {
        step = std::abs(step - bmax) < std::abs(step - bmin) ? bmax - eps : bmin + eps;
        insufficient = false;
      } else {
        insufficient = true;
      }
    } else {
      insufficient = false;
    }
    Point p = evaluate(step);
    ++evals;
    ++iter;
    if (!std::isfinite(p.f) || p.f > f + cfg.c1 * p.t * gtd || p.f >= bracket[low].f) {
      bracket[high] = std::move(p);
      low = bracket[0].f <= bracket[1].f ? 0 : 1;
      high = 1 - low;
    } else {
      if (std::abs(p.gtd) <= -cfg.c2 * gtd) {
        done = true;
      } else if (p.gtd * (bracket[high].t - bracket[low].t) >= 0.0) {
        bracket[high] = bracket[low];
      }
      bracket[low] = std::move(p);
    }
  }
  return {std::move(bracket[low]), evals, done};
}

}  // namespace

void LbfgsConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("lbfgs: eta must be > 0");
  if (max_iter < 1) throw ConfigError("lbfgs: max_iter must be >= 1");
  if (history_size < 1) throw ConfigError("lbfgs: history_size must be >= 1");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("lbfgs: need 0 < c1 < c2 < 1");
}

std::vector<double> lbfgs_direction(std::span<const double> grad, const LbfgsState& state) {
  const std::size_t m = state.s_hist.size();
  std::vector<double> q(grad.begin(), grad.end());
  for (double& v : q) v = -v;
  std::vector<double> alpha(m), rho(m);
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / dot(state.y_hist[i], state.s_hist[i]);
    alpha[i] = rho[i] * dot(state.s_hist[i], q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * state.y_hist[i][j];
  }
  for (double& v : q) v *= state.h_diag;
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * dot(state.y_hist[i], q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += (alpha[i] - beta) * state.s_hist[i][j];
  }
  return q;
}

double lbfgs_step(const Objective& objective, std::span<double> theta, LbfgsState& state,
                  const LbfgsConfig& cfg) {
  cfg.validate();
  std::vector<double> grad(theta.size());
  double loss = objective(theta, grad);
  ++state.evaluations;
  const double entry_loss = loss;
  state.line_search_failed = false;
  if (!std::isfinite(loss)) throw NumericError("lbfgs: non-finite objective");
  if (max_abs(grad) <= cfg.tolerance_grad) return entry_loss;

  for (int n_iter = 1; n_iter <= cfg.max_iter; ++n_iter) {
    ++state.iterations;
    if (state.iterations == 1) {
      state.direction.assign(grad.size(), 0.0);
      for (std::size_t i = 0; i < grad.size(); ++i) state.direction[i] = -grad[i];
      state.h_diag = 1.0;
      state.s_hist.clear();
      state.y_hist.clear();
    } else {
      std::vector<double> y(grad.size()), s(grad.size());
      for (std::size_t i = 0; i < grad.size(); ++i) {
        y[i] = grad[i] - state.prev_grad[i];
        s[i] = state.direction[i] * state.step;
      }
      const double ys = dot(y, s);
      if (ys > cfg.curvature_eps * norm2(s) * norm2(y)) {
        if (state.s_hist.size() == cfg.history_size) {
          state.s_hist.pop_front();
          state.y_hist.pop_front();
        }
        state.h_diag = ys / dot(y, y);
        state.s_hist.push_back(std::move(s));
        state.y_hist.push_back(std::move(y));
      }
      state.direction = lbfgs_direction(grad, state);
    }
    state.prev_grad = grad;
    const double prev_loss = loss;

    double t = cfg.eta;
    if (state.iterations == 1) {
      double l1 = 0.0;
      for (double g : grad) l1 += std::abs(g);
      t = std::min(1.0, 1.0 / l1) * cfg.eta;
    }
    const double gtd = dot(grad, state.direction);
    if (gtd > -cfg.tolerance_change) break;

    auto ls = strong_wolfe(objective, theta, t, state.direction, loss, grad, gtd, cfg);
    state.evaluations += ls.evaluations;
    if (!ls.converged) {
      state.line_search_failed = true;
      ++state.line_search_failures;
    }
    t = ls.best.t;
    state.step = t;
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += t * state.direction[i];
    loss = ls.best.f;
    grad = std::move(ls.best.g);

    if (n_iter == cfg.max_iter) break;
    if (max_abs(grad) <= cfg.tolerance_grad) break;
    if (max_abs(state.direction) * std::abs(t) <= cfg.tolerance_change) break;
    if (std::abs(loss - prev_loss) < cfg.tolerance_change) break;
  }
  return entry_loss;
}

}  // namespace sven::optim
