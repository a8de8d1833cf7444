#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sven/matrix.hpp"
#include "sven/rng.hpp"

namespace sven::optim {

enum class OptimizerKind { Sven, NatGrad, Sgd, PolyakSgd, RmsProp, Adam, Lbfgs };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct SvenConfig {
  double eta = 0.5;
  std::size_t k = 16;
  double rtol = 1e-3;
  double kappa = 2.0;
  std::size_t micro_batch_size = 1;
  double param_fraction = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One Sven update: θ[mask] ← θ[mask] − η · M⁺_k · R, where M⁺_k is the
/// pseudoinverse built from the top-k singular triplets of `jacobian` that
/// pass the rtol threshold. Coordinates outside `mask` are untouched; an
/// empty mask means every coordinate (and then |θ| must equal the Jacobian
/// width). The randomized SVD draws from sub-stream `stream` of cfg.seed.
///
/// Returns the retained singular values (empty if none survived, in which
/// case θ is unchanged).
std::vector<double> sven_step(std::span<const double> residuals, const Matrix& jacobian,
                              const SvenConfig& cfg, std::span<double> theta,
                              std::span<const std::size_t> mask = {}, std::uint64_t stream = 0);

/// ⌈fraction·n⌉ distinct indices drawn uniformly without replacement, sorted.
std::vector<std::size_t> sample_param_mask(std::size_t n, double fraction, Rng& rng);

/// Gauss-Newton / natural-gradient update θ ← θ − η (MᵀM)⁻¹ Mᵀ R for the
/// under-parametrized case. Throws ConfigError when there are fewer rows
/// than columns and NumericError when MᵀM is singular or its condition
/// number exceeds kNatGradMaxCondition.
void natgrad_step(std::span<const double> residuals, const Matrix& jacobian, double eta,
                  std::span<double> theta, std::span<const std::size_t> mask = {});

inline constexpr double kNatGradMaxCondition = 1e12;

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;
inline constexpr double kRmsPropRho = 0.99;
inline constexpr double kRmsPropEps = 1e-8;
inline constexpr double kPolyakEps = 1e-12;

/// Moment buffers shared by RMSProp (uses `v`) and Adam (`m` and `v`).
struct MomentState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

void sgd_step(std::span<const double> grad, double eta, std::span<double> theta);
/// Step size loss / (‖g‖² + ε) with target loss 0.
void polyak_sgd_step(std::span<const double> grad, double loss, std::span<double> theta);
void rmsprop_step(std::span<const double> grad, MomentState& state, double eta,
                  std::span<double> theta);
void adam_step(std::span<const double> grad, MomentState& state, double eta,
               std::span<double> theta);

}  // namespace sven::optim
