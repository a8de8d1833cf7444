#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sven/matrix.hpp"

namespace sven::net {

/// Fully connected network: affine + GeLU on every hidden layer, affine output.
///
/// Parameters live in one flat vector. Per layer the weight matrix
/// (fan_out × fan_in, row-major) comes first, then the bias.
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<double> theta;

  std::size_t num_layers() const noexcept { return layer_dims.size() - 1; }
  std::size_t input_dim() const noexcept { return layer_dims.front(); }
  std::size_t output_dim() const noexcept { return layer_dims.back(); }
  std::size_t num_params() const noexcept { return theta.size(); }
};

/// Σ (fan_in·fan_out + fan_out) over layers. Throws ConfigError for fewer
/// than two dims or a zero width.
std::size_t param_count(std::span<const std::size_t> dims);

struct LayerParams {
  Matrix weight;  // fan_out × fan_in
  std::vector<double> bias;
};

std::vector<LayerParams> unflatten(std::span<const std::size_t> dims,
                                   std::span<const double> theta);
std::vector<double> flatten(std::span<const LayerParams> layers);

/// Weights and biases i.i.d. uniform on [-1/√fan_in, 1/√fan_in].
MlpModel init_mlp(std::vector<std::size_t> dims, std::uint64_t seed);

/// Exact GeLU, x·Φ(x).
double gelu(double x);
/// Φ(x) + x·φ(x).
double gelu_prime(double x);

/// Pre-activations and activations of one evaluation, kept for the reverse
/// pass. act[0] is the input, act.back() the network output.
struct ForwardTape {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

struct ForwardResult {
  std::vector<double> output;
  ForwardTape tape;
};

ForwardResult forward(const MlpModel& model, std::span<const double> x);

/// Output only; no tape.
std::vector<double> predict(const MlpModel& model, std::span<const double> x);

/// Gradient of <cotangent, f_θ(x)> with respect to θ in flatten order.
std::vector<double> grad_scalar(const MlpModel& model, const ForwardTape& tape,
                                std::span<const double> cotangent);

/// out += scale · grad_scalar(model, tape, cotangent), without allocating the
/// parameter-sized temporary.
void accumulate_grad(const MlpModel& model, const ForwardTape& tape,
                     std::span<const double> cotangent, double scale, std::span<double> out);

}  // namespace sven::net
