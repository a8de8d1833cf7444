#include "sven/data.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "sven/error.hpp"

namespace sven::data {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Sine1d: return "sine1d";
    case DatasetKind::Poly6: return "poly6";
    case DatasetKind::Mnist: return "mnist";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (auto k : {DatasetKind::Sine1d, DatasetKind::Poly6, DatasetKind::Mnist})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown dataset '" + std::string(name) + "'");
}

void Standardization::apply(Matrix& m) const {
  const bool scalar = mean.size() == 1;
  if (!scalar && mean.size() != m.cols())
    throw ShapeError("standardization width does not match the data");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      const std::size_t f = scalar ? 0 : j;
      r[j] = (r[j] - mean[f]) / std[f];
    }
  }
}

Standardization fit_per_feature(const Matrix& m) {
  if (m.rows() == 0) throw ConfigError("cannot standardize an empty split");
  Standardization s{std::vector<double>(m.cols(), 0.0), std::vector<double>(m.cols(), 0.0)};
  const double n = static_cast<double>(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s.mean[j] += m(i, j);
  for (double& v : s.mean) v /= n;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const double d = m(i, j) - s.mean[j];
      s.std[j] += d * d;
    }
  for (double& v : s.std) {
    v = std::sqrt(v / n);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

Standardization fit_scalar(const Matrix& m) {
  if (m.empty()) throw ConfigError("cannot standardize an empty split");
  const auto vals = m.values();
  const double n = static_cast<double>(vals.size());
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) sd = 1.0;
  return {{mean}, {sd}};
}

namespace {

void finish_regression(Dataset& ds, bool standardize_targets) {
  ds.input_stats = fit_per_feature(ds.train.inputs);
  ds.input_stats.apply(ds.train.inputs);
  ds.input_stats.apply(ds.val.inputs);
  if (standardize_targets) {
    ds.target_stats = fit_per_feature(ds.train.targets);
    ds.target_stats.apply(ds.train.targets);
    ds.target_stats.apply(ds.val.targets);
  }
}

}  // namespace

double sine1d_target(double x) { return std::exp(-10.0 * x * x) * std::sin(2.0 * x); }

Dataset gen_sine1d(std::size_t n, std::uint64_t seed, bool standardize_targets) {
  if (n < 1) throw ConfigError("gen_sine1d: n must be >= 1");
  Rng rng(seed);
  Dataset ds;
  for (Split* split : {&ds.train, &ds.val}) {
    split->inputs = Matrix(n, 1);
    split->targets = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      split->inputs(i, 0) = x;
      split->targets(i, 0) = sine1d_target(x);
    }
  }
  finish_regression(ds, standardize_targets);
  return ds;
}

std::vector<Exponents> poly6_monomials() {
  std::vector<Exponents> out;
  Exponents cur{};
  std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int left) {
    if (pos == cur.size() - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[pos] = e;
      fill(pos + 1, left - e);
    }
  };
  for (int degree = 0; degree <= 4; ++degree) fill(0, degree);
  return out;
}

double Polynomial::operator()(std::span<const double> x) const {
  if (x.size() != 6) throw ShapeError("poly6: input must have 6 coordinates");
  double total = 0.0;
  for (std::size_t m = 0; m < exponents.size(); ++m) {
    double term = coeffs[m];
    for (std::size_t i = 0; i < 6; ++i)
      for (int p = 0; p < exponents[m][i]; ++p) term *= x[i];
    total += term;
  }
  return total;
}

Polynomial random_poly6(Rng& rng) {
  Polynomial p{poly6_monomials(), {}};
  p.coeffs.resize(p.exponents.size());
  for (double& c : p.coeffs) c = rng.normal();
  return p;
}

Dataset gen_poly6(std::size_t n, std::uint64_t seed, bool standardize_targets) {
  if (n < 1) throw ConfigError("gen_poly6: n must be >= 1");
  Rng rng(seed);
  const Polynomial poly = random_poly6(rng);
  Dataset ds;
  for (Split* split : {&ds.train, &ds.val}) {
    split->inputs = Matrix(n, 6);
    split->targets = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : split->inputs.row(i)) v = rng.normal();
      split->targets(i, 0) = poly(split->inputs.row(i));
    }
  }
  finish_regression(ds, standardize_targets);
  return ds;
}

std::vector<double> one_hot(int label, std::size_t classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes)
    throw ConfigError("one_hot: label " + std::to_string(label) + " outside [0, " +
                      std::to_string(classes) + ")");
  std::vector<double> v(classes, 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

std::vector<std::size_t> epoch_permutation(std::size_t n, const BatchPlan& plan,
                                           std::size_t epoch) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(plan.seed, epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, const BatchPlan& plan,
                                              std::size_t epoch) {
  if (plan.batch_size < 1) throw ConfigError("batch size must be >= 1");
  const auto perm = epoch_permutation(n, plan, epoch);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += plan.batch_size) {
    const std::size_t end = std::min(n, start + plan.batch_size);
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                     perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(const Dataset& dataset, const BatchPlan& plan,
                                              std::size_t epoch) {
  return batches(dataset.train.size(), plan, epoch);
}

}  // namespace sven::data
