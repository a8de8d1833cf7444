#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sven/dataset.hpp"
#include "sven/matrix.hpp"
#include "sven/mlp.hpp"

namespace sven::loss {

enum class LossKind {
  /// Scalar regression with signed residual f − y (loss r²). Equivalent to
  /// the κ = 1 effective residual up to row signs; κ is not used.
  L2Signed,
  /// ‖f − y‖² with κ-power effective residuals.
  LabelRegression,
  /// −log softmax(f)[label] with κ-power effective residuals.
  CrossEntropy,
};

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::L2Signed;
  double kappa = 2.0;

  void validate() const;
};

/// ℓ for one sample, except L2Signed which returns the signed residual
/// f − y (its loss is the square). `label` is only read by CrossEntropy.
double per_sample_loss(const LossSpec& spec, const net::MlpModel& model,
                       std::span<const double> x, std::span<const double> y, int label);

/// Contiguous grouping of a batch into conditions: condition c covers batch
/// positions [offsets[c], offsets[c+1]).
struct ConditionMap {
  std::vector<std::size_t> offsets;

  std::size_t count() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// ceil(batch_size / micro_batch_size) contiguous groups.
ConditionMap contiguous_conditions(std::size_t batch_size, std::size_t micro_batch_size);

/// Effective residual per condition.
///
/// `per_sample` holds signed residuals for L2Signed and sub-losses ℓ for the
/// other kinds. L2Signed keeps singleton residuals as they are and maps a
/// group to sqrt(Σ r²); the κ kinds map a group to (Σ ℓ)^{κ/2}.
std::vector<double> effective_residuals(const LossSpec& spec, std::span<const double> per_sample,
                                        const ConditionMap& conditions);

struct ResidualBatch {
  std::vector<double> residuals;        // B′
  Matrix jacobian;                      // B′ × |mask|
  std::vector<double> per_sample_losses;  // B, raw ℓ
  ConditionMap conditions;
};

/// Effective residuals and their Jacobian with respect to the parameters in
/// `param_mask` (column c of the Jacobian is parameter param_mask[c]).
///
/// A condition whose summed loss is zero while κ < 2 gets residual 0 and an
/// all-zero row.
ResidualBatch residual_jacobian(const LossSpec& spec, const net::MlpModel& model,
                                const Batch& batch, std::size_t micro_batch_size,
                                std::span<const std::size_t> param_mask);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean per-sample loss over the batch and its gradient in flatten order.
LossAndGrad mean_loss_and_grad(const LossSpec& spec, const net::MlpModel& model,
                               const Batch& batch);

/// Mean per-sample loss over a whole split.
double mean_loss(const LossSpec& spec, const net::MlpModel& model, const Split& split);

}  // namespace sven::loss
