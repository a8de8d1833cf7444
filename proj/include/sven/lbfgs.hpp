#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace sven::optim {

/// Evaluates the objective at θ, writes its gradient into `grad` and returns
/// the objective value.
using Objective = std::function<double(std::span<const double> theta, std::span<double> grad)>;

struct LbfgsConfig {
  double eta = 1.0;
  int max_iter = 20;
  std::size_t history_size = 10;
  double tolerance_grad = 1e-7;
  double tolerance_change = 1e-9;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 25;
  /// Curvature pairs with sᵀy <= curvature_eps·‖s‖‖y‖ are skipped.
  double curvature_eps = 1e-10;

  void validate() const;
};

/// History and bookkeeping carried between calls.
struct LbfgsState {
  std::deque<std::vector<double>> s_hist;
  std::deque<std::vector<double>> y_hist;
  double h_diag = 1.0;
  std::vector<double> direction;
  double step = 0.0;
  std::vector<double> prev_grad;
  long iterations = 0;
  long evaluations = 0;
  /// Set when the last line search ran out of evaluations without meeting
  /// the strong Wolfe conditions; the best bracketed point was accepted.
  bool line_search_failed = false;
  long line_search_failures = 0;
};

/// Up to cfg.max_iter quasi-Newton iterations on `objective`, each with a
/// strong-Wolfe line search starting at step cfg.eta (the very first
/// iteration starts at min(1, 1/‖g‖₁)·eta). Updates θ in place and returns
/// the objective value at the entry point.
double lbfgs_step(const Objective& objective, std::span<double> theta, LbfgsState& state,
                  const LbfgsConfig& cfg);

/// Two-loop recursion: approximately −H·g from the stored curvature pairs.
std::vector<double> lbfgs_direction(std::span<const double> grad, const LbfgsState& state);

}  // namespace sven::optim
