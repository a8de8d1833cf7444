#include "sven/mlp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sven/error.hpp"
#include "sven/rng.hpp"

namespace sven::net {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_input(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("forward: input of length " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(model.input_dim()));
  }
  if (model.theta.size() != param_count(model.layer_dims))
    throw ShapeError("forward: parameter vector does not match layer dims");
}

// y = W·a + b for the layer whose weights start at `w`.
void affine(const double* w, std::size_t fan_in, std::size_t fan_out,
            std::span<const double> a, std::vector<double>& y) {
  y.resize(fan_out);
  const double* b = w + fan_in * fan_out;
  for (std::size_t o = 0; o < fan_out; ++o) {
    const double* wo = w + o * fan_in;
    double s = b[o];
    for (std::size_t i = 0; i < fan_in; ++i) s += wo[i] * a[i];
    y[o] = s;
  }
}

}  // namespace

std::size_t param_count(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ConfigError("MLP needs at least an input and an output width");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) throw ConfigError("MLP layer widths must be >= 1");
    n += dims[l] * dims[l + 1] + dims[l + 1];
  }
  return n;
}

std::vector<LayerParams> unflatten(std::span<const std::size_t> dims,
                                   std::span<const double> theta) {
  if (theta.size() != param_count(dims))
    throw ShapeError("unflatten: parameter vector does not match layer dims");
  std::vector<LayerParams> layers;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fi = dims[l], fo = dims[l + 1];
    LayerParams p;
    p.weight = Matrix(fo, fi, std::vector<double>(theta.begin() + off, theta.begin() + off + fo * fi));
    off += fo * fi;
    p.bias.assign(theta.begin() + off, theta.begin() + off + fo);
    off += fo;
    layers.push_back(std::move(p));
  }
  return layers;
}

std::vector<double> flatten(std::span<const LayerParams> layers) {
  std::vector<double> theta;
  for (const auto& p : layers) {
    if (p.bias.size() != p.weight.rows()) throw ShapeError("flatten: bias/weight mismatch");
    theta.insert(theta.end(), p.weight.values().begin(), p.weight.values().end());
    theta.insert(theta.end(), p.bias.begin(), p.bias.end());
  }
  return theta;
}

MlpModel init_mlp(std::vector<std::size_t> dims, std::uint64_t seed) {
  const std::size_t n = param_count(dims);
  MlpModel model{std::move(dims), std::vector<double>(n)};
  Rng rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const std::size_t fi = model.layer_dims[l], fo = model.layer_dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fi));
    for (std::size_t i = 0; i < fo * fi + fo; ++i) model.theta[off + i] = rng.uniform(-bound, bound);
    off += fo * fi + fo;
  }
  return model;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_prime(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

ForwardResult forward(const MlpModel& model, std::span<const double> x) {
  check_input(model, x);
  const std::size_t layers = model.num_layers();
  ForwardResult r;
  r.tape.pre.resize(layers);
  r.tape.act.resize(layers + 1);
  r.tape.act[0].assign(x.begin(), x.end());
  const double* w = model.theta.data();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fi = model.layer_dims[l], fo = model.layer_dims[l + 1];
    affine(w, fi, fo, r.tape.act[l], r.tape.pre[l]);
    auto& a = r.tape.act[l + 1];
    a = r.tape.pre[l];
    if (l + 1 < layers)
      for (double& v : a) v = gelu(v);
    w += fi * fo + fo;
  }
  r.output = r.tape.act.back();
  return r;
}

std::vector<double> predict(const MlpModel& model, std::span<const double> x) {
  check_input(model, x);
  std::vector<double> a(x.begin(), x.end()), z;
  const double* w = model.theta.data();
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const std::size_t fi = model.layer_dims[l], fo = model.layer_dims[l + 1];
    affine(w, fi, fo, a, z);
    if (l + 1 < model.num_layers())
      for (double& v : z) v = gelu(v);
    std::swap(a, z);
    w += fi * fo + fo;
  }
  return a;
}

void accumulate_grad(const MlpModel& model, const ForwardTape& tape,
                     std::span<const double> cotangent, double scale, std::span<double> out) {
  const std::size_t layers = model.num_layers();
  bool stale = tape.act.size() != layers + 1 || tape.pre.size() != layers ||
               model.theta.size() != param_count(model.layer_dims) ||
               out.size() != model.theta.size();
  for (std::size_t l = 0; !stale && l <= layers; ++l) {
    stale = tape.act[l].size() != model.layer_dims[l] ||
            (l < layers && tape.pre[l].size() != model.layer_dims[l + 1]);
  }
  if (stale) throw ShapeError("grad_scalar: tape or output buffer does not match the model");
  if (cotangent.size() != model.output_dim())
    throw ShapeError("grad_scalar: cotangent length does not match the output width");

  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += model.layer_dims[l] * model.layer_dims[l + 1] + model.layer_dims[l + 1];
  }

  std::vector<double> delta(cotangent.begin(), cotangent.end()), next;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t fi = model.layer_dims[l], fo = model.layer_dims[l + 1];
    const double* w = model.theta.data() + offsets[l];
    double* gw = out.data() + offsets[l];
    double* gb = gw + fi * fo;
    const auto& a = tape.act[l];
    for (std::size_t o = 0; o < fo; ++o) {
      const double d = scale * delta[o];
      if (d == 0.0) continue;
      double* gwo = gw + o * fi;
      for (std::size_t i = 0; i < fi; ++i) gwo[i] += d * a[i];
      gb[o] += d;
    }
    if (l == 0) break;
    next.assign(fi, 0.0);
    for (std::size_t o = 0; o < fo; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* wo = w + o * fi;
      for (std::size_t i = 0; i < fi; ++i) next[i] += wo[i] * d;
    }
    const auto& z = tape.pre[l - 1];
    for (std::size_t i = 0; i < fi; ++i) next[i] *= gelu_prime(z[i]);
    std::swap(delta, next);
  }
}

std::vector<double> grad_scalar(const MlpModel& model, const ForwardTape& tape,
                                std::span<const double> cotangent) {
  std::vector<double> g(model.theta.size(), 0.0);
  accumulate_grad(model, tape, cotangent, 1.0, g);
  return g;
}

}  // namespace sven::net
