#include "sven/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sven/error.hpp"

namespace sven::loss {

namespace {

struct Terms {
  double loss;   // ℓ ≥ 0
  double value;  // signed residual for L2Signed, ℓ otherwise
};

// Fills `cot` with ∂value/∂f.
Terms sample_terms(const LossSpec& spec, std::span<const double> f, std::span<const double> y,
                   int label, std::vector<double>& cot) {
  cot.assign(f.size(), 0.0);
  switch (spec.kind) {
    case LossKind::L2Signed: {
      if (f.size() != 1 || y.size() != 1)
        throw ShapeError("l2 signed residuals need scalar outputs and targets");
      const double r = f[0] - y[0];
      cot[0] = 1.0;
      return {r * r, r};
    }
    case LossKind::LabelRegression: {
      if (y.size() != f.size())
        throw ShapeError("label regression: target width " + std::to_string(y.size()) +
                         " != output width " + std::to_string(f.size()));
      double l = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - y[i];
        l += d * d;
        cot[i] = 2.0 * d;
      }
      return {l, l};
    }
    case LossKind::CrossEntropy: {
      if (label < 0 || static_cast<std::size_t>(label) >= f.size())
        throw ConfigError("cross entropy: label " + std::to_string(label) + " outside [0, " +
                          std::to_string(f.size()) + ")");
      const double m = *std::max_element(f.begin(), f.end());
      double z = 0.0;
      for (double v : f) z += std::exp(v - m);
      const double lse = m + std::log(z);
      for (std::size_t i = 0; i < f.size(); ++i) cot[i] = std::exp(f[i] - lse);
      cot[static_cast<std::size_t>(label)] -= 1.0;
      const double l = std::max(0.0, lse - f[static_cast<std::size_t>(label)]);
      return {l, l};
    }
  }
  throw ConfigError("unknown loss kind");
}

int label_at(const Split& split, std::size_t i) {
  return split.labels.empty() ? -1 : split.labels[i];
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L2Signed: return "l2";
    case LossKind::LabelRegression: return "label_regression";
    case LossKind::CrossEntropy: return "cross_entropy";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "l2" || name == "l2_regression_signed") return LossKind::L2Signed;
  if (name == "label_regression") return LossKind::LabelRegression;
  if (name == "cross_entropy" || name == "ce") return LossKind::CrossEntropy;
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

void LossSpec::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be > 0");
}

double per_sample_loss(const LossSpec& spec, const net::MlpModel& model,
                       std::span<const double> x, std::span<const double> y, int label) {
  std::vector<double> cot;
  return sample_terms(spec, net::predict(model, x), y, label, cot).value;
}

ConditionMap contiguous_conditions(std::size_t batch_size, std::size_t micro_batch_size) {
  if (micro_batch_size < 1) throw ConfigError("micro-batch size must be >= 1");
  ConditionMap map;
  for (std::size_t start = 0; start < batch_size; start += micro_batch_size)
    map.offsets.push_back(start);
  map.offsets.push_back(batch_size);
  if (batch_size == 0) map.offsets = {0};
  return map;
}

std::vector<double> effective_residuals(const LossSpec& spec, std::span<const double> per_sample,
                                        const ConditionMap& conditions) {
  spec.validate();
  if (conditions.offsets.empty() || conditions.offsets.back() != per_sample.size())
    throw ShapeError("effective_residuals: condition map does not cover the batch");
  std::vector<double> out(conditions.count());
  for (std::size_t c = 0; c < conditions.count(); ++c) {
    const std::size_t lo = conditions.offsets[c], hi = conditions.offsets[c + 1];
    if (spec.kind == LossKind::L2Signed) {
      if (hi - lo == 1) {
        out[c] = per_sample[lo];
      } else {
        double s = 0.0;
        for (std::size_t a = lo; a < hi; ++a) s += per_sample[a] * per_sample[a];
        out[c] = std::sqrt(s);
      }
      continue;
    }
    double s = 0.0;
    for (std::size_t a = lo; a < hi; ++a) {
      if (per_sample[a] < 0.0)
        throw NumericError("effective_residuals: negative sub-loss under a kappa-power loss");
      s += per_sample[a];
    }
    out[c] = spec.kappa == 2.0 ? s : std::pow(s, 0.5 * spec.kappa);
  }
  return out;
}

ResidualBatch residual_jacobian(const LossSpec& spec, const net::MlpModel& model,
                                const Batch& batch, std::size_t micro_batch_size,
                                std::span<const std::size_t> param_mask) {
  spec.validate();
  if (batch.size() == 0) throw ConfigError("residual_jacobian: empty batch");
  if (param_mask.empty()) throw ConfigError("residual_jacobian: empty parameter mask");
  const std::size_t n = model.num_params();
  for (std::size_t idx : param_mask)
    if (idx >= n) throw ShapeError("residual_jacobian: parameter mask index out of range");

  ResidualBatch out;
  out.conditions = contiguous_conditions(batch.size(), micro_batch_size);
  const std::size_t nc = out.conditions.count();
  out.jacobian = Matrix(nc, param_mask.size());
  out.per_sample_losses.resize(batch.size());

  std::vector<double> values(batch.size());
  std::vector<double> cot;
  std::vector<double> grad(n);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t lo = out.conditions.offsets[c], hi = out.conditions.offsets[c + 1];
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t a = lo; a < hi; ++a) {
      const std::size_t i = batch.indices[a];
      auto fw = net::forward(model, batch.split.inputs.row(i));
      const Terms t = sample_terms(spec, fw.output, batch.split.targets.row(i),
                                   label_at(batch.split, i), cot);
      out.per_sample_losses[a] = t.loss;
      values[a] = t.value;
      // Signed groups differentiate sqrt(Σ r²): Σ r·∂r, normalized below.
      const double scale = (spec.kind == LossKind::L2Signed && hi - lo > 1) ? t.value : 1.0;
      net::accumulate_grad(model, fw.tape, cot, scale, grad);
    }

    double factor = 1.0;
    if (spec.kind == LossKind::L2Signed) {
      if (hi - lo > 1) {
        double s = 0.0;
        for (std::size_t a = lo; a < hi; ++a) s += values[a] * values[a];
        factor = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
      }
    } else {
      double total = 0.0;
      for (std::size_t a = lo; a < hi; ++a) total += values[a];
      const double power = 0.5 * spec.kappa - 1.0;
      if (power == 0.0) {
        factor = 0.5 * spec.kappa;
      } else if (total > 0.0) {
        factor = 0.5 * spec.kappa * std::pow(total, power);
      } else {
        factor = 0.0;  // κ < 2: singular chain rule, condition already met; κ > 2: zero
      }
    }
    auto row = out.jacobian.row(c);
    for (std::size_t col = 0; col < param_mask.size(); ++col)
      row[col] = factor * grad[param_mask[col]];
  }
  out.residuals = effective_residuals(spec, values, out.conditions);
  return out;
}

LossAndGrad mean_loss_and_grad(const LossSpec& spec, const net::MlpModel& model,
                               const Batch& batch) {
  if (batch.size() == 0) throw ConfigError("mean_loss_and_grad: empty batch");
  LossAndGrad out{0.0, std::vector<double>(model.num_params(), 0.0)};
  std::vector<double> cot;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch.indices) {
    auto fw = net::forward(model, batch.split.inputs.row(i));
    const Terms t =
        sample_terms(spec, fw.output, batch.split.targets.row(i), label_at(batch.split, i), cot);
    out.loss += t.loss;
    // ∂ℓ/∂f: for signed residuals ℓ = r² so the cotangent doubles.
    const double scale = spec.kind == LossKind::L2Signed ? 2.0 * t.value * inv : inv;
    net::accumulate_grad(model, fw.tape, cot, scale, out.grad);
  }
  out.loss *= inv;
  return out;
}

double mean_loss(const LossSpec& spec, const net::MlpModel& model, const Split& split) {
  if (split.size() == 0) throw ConfigError("mean_loss: empty split");
  std::vector<double> cot;
  double total = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto f = net::predict(model, split.inputs.row(i));
    total += sample_terms(spec, f, split.targets.row(i), label_at(split, i), cot).loss;
  }
  return total / static_cast<double>(split.size());
}

}  // namespace sven::loss
