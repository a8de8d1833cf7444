#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sven/error.hpp"
#include "sven/harness.hpp"
#include "sven/lbfgs.hpp"
#include "sven/mlp.hpp"

namespace sven::harness {

namespace {

constexpr std::uint64_t kLoaderStream = 1;
constexpr std::uint64_t kMaskStream = 2;

struct SpectrumAccumulator {
  std::vector<double> sum;
  std::vector<std::size_t> count;

  void add(std::span<const double> s) {
    if (s.empty() || !(s[0] > 0.0)) return;
    if (sum.size() < s.size()) {
      sum.resize(s.size(), 0.0);
      count.resize(s.size(), 0);
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      sum[j] += s[j] / s[0];
      ++count[j];
    }
  }
};

std::size_t smallest_batch(std::size_t n, std::size_t batch) {
  const std::size_t rem = n % batch;
  return n < batch ? n : (rem == 0 ? batch : rem);
}

}  // namespace

double RunRecord::final_val_loss() const {
  if (diverged || epochs.empty()) return std::numeric_limits<double>::infinity();
  return epochs.back().val_loss;
}

data::Dataset make_dataset(const RunConfig& cfg) {
  switch (cfg.dataset) {
    case data::DatasetKind::Sine1d:
      return data::gen_sine1d(cfg.n_samples, cfg.seed_data, cfg.standardize_targets);
    case data::DatasetKind::Poly6:
      return data::gen_poly6(cfg.n_samples, cfg.seed_data, cfg.standardize_targets);
    case data::DatasetKind::Mnist:
      return data::load_mnist(cfg.mnist_dir);
  }
  throw ConfigError("unknown dataset");
}

RunRecord train_run(const RunConfig& cfg) {
  const RunConfig resolved = resolve(cfg);
  return train_run(resolved, make_dataset(resolved));
}

RunRecord train_run(const RunConfig& input, const data::Dataset& ds) {
  using optim::OptimizerKind;
  const RunConfig cfg = resolve(input);
  if (ds.train.size() == 0 || ds.val.size() == 0) throw ConfigError("dataset has an empty split");
  const loss::LossSpec spec{*cfg.loss, cfg.kappa};

  std::vector<std::size_t> dims{ds.train.inputs.cols()};
  dims.insert(dims.end(), cfg.widths.begin(), cfg.widths.end());
  dims.push_back(ds.train.targets.cols());
  net::MlpModel model = net::init_mlp(dims, cfg.seed_model);
  const std::size_t n_params = model.num_params();

  RunRecord rec;
  rec.config = cfg;
  rec.num_params = n_params;

  const data::BatchPlan plan{*cfg.batch_size, derive_seed(cfg.seed_data, kLoaderStream)};
  if (cfg.optimizer == OptimizerKind::NatGrad) {
    const std::size_t min_batch = smallest_batch(ds.train.size(), *cfg.batch_size);
    const std::size_t conditions = (min_batch + cfg.micro_batch - 1) / cfg.micro_batch;
    const auto updated = static_cast<std::size_t>(
        std::ceil(cfg.param_fraction * static_cast<double>(n_params) - 1e-9));
    if (conditions < updated) {
      throw ConfigError("natgrad needs at least as many conditions per batch as updated "
                        "parameters (" + std::to_string(conditions) + " < " +
                        std::to_string(updated) + "); use the sven optimizer instead");
    }
  }

  rec.initial_train_loss = loss::mean_loss(spec, model, ds.train);
  rec.initial_val_loss = loss::mean_loss(spec, model, ds.val);

  const optim::SvenConfig sven_cfg{cfg.eta,         cfg.k,          cfg.rtol,    cfg.kappa,
                                   cfg.micro_batch, cfg.param_fraction, cfg.seed_opt};
  optim::LbfgsConfig lbfgs_cfg;
  lbfgs_cfg.eta = cfg.eta;
  lbfgs_cfg.max_iter = cfg.max_iter;
  lbfgs_cfg.history_size = cfg.history_size;

  Rng mask_rng(derive_seed(cfg.seed_opt, kMaskStream));
  std::vector<std::size_t> all_params(n_params);
  std::iota(all_params.begin(), all_params.end(), 0);
  optim::MomentState moments;
  optim::LbfgsState lbfgs_state;
  net::MlpModel scratch = model;

  std::uint64_t step = 0;
  double wall = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    SpectrumAccumulator spectrum;
    try {
      for (const auto& indices : data::batches(ds, plan, epoch - 1)) {
        const Batch batch{ds.train, indices};
        const auto t0 = std::chrono::steady_clock::now();
        switch (cfg.optimizer) {
          case OptimizerKind::Sven:
          case OptimizerKind::NatGrad: {
            std::vector<std::size_t> mask;
            if (cfg.param_fraction < 1.0)
              mask = optim::sample_param_mask(n_params, cfg.param_fraction, mask_rng);
            const auto& cols = mask.empty() ? all_params : mask;
            const auto rb = loss::residual_jacobian(spec, model, batch, cfg.micro_batch, cols);
            if (cfg.optimizer == OptimizerKind::Sven) {
              spectrum.add(optim::sven_step(rb.residuals, rb.jacobian, sven_cfg, model.theta,
                                            mask, step));
            } else {
              optim::natgrad_step(rb.residuals, rb.jacobian, cfg.eta, model.theta, mask);
            }
            break;
          }
          case OptimizerKind::Sgd: {
            const auto lg = loss::mean_loss_and_grad(spec, model, batch);
            optim::sgd_step(lg.grad, cfg.eta, model.theta);
            break;
          }
          case OptimizerKind::PolyakSgd: {
            const auto lg = loss::mean_loss_and_grad(spec, model, batch);
            optim::polyak_sgd_step(lg.grad, lg.loss, model.theta);
            break;
          }
          case OptimizerKind::RmsProp: {
            const auto lg = loss::mean_loss_and_grad(spec, model, batch);
            optim::rmsprop_step(lg.grad, moments, cfg.eta, model.theta);
            break;
          }
          case OptimizerKind::Adam: {
            const auto lg = loss::mean_loss_and_grad(spec, model, batch);
            optim::adam_step(lg.grad, moments, cfg.eta, model.theta);
            break;
          }
          case OptimizerKind::Lbfgs: {
            const optim::Objective objective = [&](std::span<const double> theta,
                                                   std::span<double> grad) {
              scratch.theta.assign(theta.begin(), theta.end());
              auto lg = loss::mean_loss_and_grad(spec, scratch, batch);
              std::copy(lg.grad.begin(), lg.grad.end(), grad.begin());
              return lg.loss;
            };
            optim::lbfgs_step(objective, model.theta, lbfgs_state, lbfgs_cfg);
            break;
          }
        }
        wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++step;
      }
    } catch (const NumericError& e) {
      rec.diverged = true;
      rec.diverged_epoch = epoch;
      rec.divergence_reason = e.what();
      break;
    }

    EpochMetrics m{epoch, loss::mean_loss(spec, model, ds.train),
                   loss::mean_loss(spec, model, ds.val), wall};
    rec.epochs.push_back(m);
    for (std::size_t j = 0; j < spectrum.sum.size(); ++j) {
      rec.spectra.push_back({epoch, j, spectrum.sum[j] / static_cast<double>(spectrum.count[j]),
                             spectrum.count[j]});
    }
    if (!std::isfinite(m.train_loss) || !std::isfinite(m.val_loss)) {
      rec.diverged = true;
      rec.diverged_epoch = epoch;
      rec.divergence_reason = "non-finite loss";
      break;
    }
  }
  rec.line_search_failures = lbfgs_state.line_search_failures;
  return rec;
}

}  // namespace sven::harness
