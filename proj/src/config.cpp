#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

#include <json.hpp>

#include "sven/error.hpp"
#include "sven/harness.hpp"
#include "sven/lbfgs.hpp"

namespace sven::harness {

namespace {

template <typename T>
T parse_number(std::string_view name, std::string_view text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("option --" + std::string(name) + ": cannot parse '" + std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view name, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("option --" + std::string(name) + ": expected a boolean, got '" +
                    std::string(text) + "'");
}

std::vector<std::size_t> parse_widths(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(parse_number<std::size_t>("widths", text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::vector<std::string>& option_names() {
  static const std::vector<std::string> names = {
      "dataset",   "loss",         "optimizer",      "eta",          "k",
      "rtol",      "kappa",        "micro-batch",    "param-fraction", "max-iter",
      "history-size", "epochs",    "batch-size",     "widths",       "n-samples",
      "standardize-targets", "seed-model", "seed-data", "seed-opt",   "out",
      "mnist-dir"};
  return names;
}

void set_option(RunConfig& cfg, std::string_view name, std::string_view value) {
  while (!name.empty() && name.front() == '-') name.remove_prefix(1);
  if (name == "dataset") cfg.dataset = data::parse_dataset_kind(value);
  else if (name == "loss") cfg.loss = loss::parse_loss_kind(value);
  else if (name == "optimizer") cfg.optimizer = optim::parse_optimizer_kind(value);
  else if (name == "eta") cfg.eta = parse_number<double>(name, value);
  else if (name == "k") cfg.k = parse_number<std::size_t>(name, value);
  else if (name == "rtol") cfg.rtol = parse_number<double>(name, value);
  else if (name == "kappa") cfg.kappa = parse_number<double>(name, value);
  else if (name == "micro-batch") cfg.micro_batch = parse_number<std::size_t>(name, value);
  else if (name == "param-fraction") cfg.param_fraction = parse_number<double>(name, value);
  else if (name == "max-iter") cfg.max_iter = parse_number<int>(name, value);
  else if (name == "history-size") cfg.history_size = parse_number<std::size_t>(name, value);
  else if (name == "epochs") cfg.epochs = parse_number<std::size_t>(name, value);
  else if (name == "batch-size") cfg.batch_size = parse_number<std::size_t>(name, value);
  else if (name == "widths") cfg.widths = parse_widths(value);
  else if (name == "n-samples") cfg.n_samples = parse_number<std::size_t>(name, value);
  else if (name == "standardize-targets") cfg.standardize_targets = parse_bool(name, value);
  else if (name == "seed-model") cfg.seed_model = parse_number<std::uint64_t>(name, value);
  else if (name == "seed-data") cfg.seed_data = parse_number<std::uint64_t>(name, value);
  else if (name == "seed-opt") cfg.seed_opt = parse_number<std::uint64_t>(name, value);
  else if (name == "out") cfg.out_dir = std::string(value);
  else if (name == "mnist-dir") cfg.mnist_dir = std::string(value);
  else throw ConfigError("unknown option --" + std::string(name));
}

RunConfig resolve(RunConfig cfg) {
  const bool mnist = cfg.dataset == data::DatasetKind::Mnist;
  if (!cfg.loss) cfg.loss = mnist ? loss::LossKind::LabelRegression : loss::LossKind::L2Signed;
  if (!cfg.batch_size) cfg.batch_size = mnist ? 64 : 32;
  if (cfg.widths.empty()) cfg.widths.assign(3, mnist ? 32 : 16);

  if (*cfg.loss == loss::LossKind::L2Signed && mnist)
    throw ConfigError("loss l2 needs a scalar target; use label_regression or cross_entropy for mnist");
  if (*cfg.loss == loss::LossKind::CrossEntropy && !mnist)
    throw ConfigError("cross_entropy needs class labels (mnist only)");
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (*cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!mnist && cfg.n_samples < 1) throw ConfigError("n-samples must be >= 1");
  for (std::size_t w : cfg.widths)
    if (w < 1) throw ConfigError("hidden widths must be >= 1");
  loss::LossSpec{*cfg.loss, cfg.kappa}.validate();
  if (!(cfg.eta > 0.0) && cfg.optimizer != optim::OptimizerKind::PolyakSgd)
    throw ConfigError("eta must be > 0");
  if (cfg.micro_batch < 1) throw ConfigError("micro-batch size must be >= 1");
  if (!(cfg.param_fraction > 0.0 && cfg.param_fraction <= 1.0))
    throw ConfigError("param-fraction must lie in (0, 1]");

  switch (cfg.optimizer) {
    case optim::OptimizerKind::Sven:
      optim::SvenConfig{cfg.eta, cfg.k, cfg.rtol, cfg.kappa, cfg.micro_batch, cfg.param_fraction,
                        cfg.seed_opt}
          .validate();
      break;
    case optim::OptimizerKind::Lbfgs: {
      optim::LbfgsConfig lc;
      lc.eta = cfg.eta;
      lc.max_iter = cfg.max_iter;
      lc.history_size = cfg.history_size;
      lc.validate();
      break;
    }
    default:
      break;
  }
  return cfg;
}

std::string config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset"] = data::to_string(cfg.dataset);
  j["loss"] = cfg.loss ? std::string(loss::to_string(*cfg.loss)) : std::string();
  j["kappa"] = cfg.kappa;
  j["optimizer"] = optim::to_string(cfg.optimizer);
  j["eta"] = cfg.eta;
  j["k"] = cfg.k;
  j["rtol"] = cfg.rtol;
  j["micro_batch"] = cfg.micro_batch;
  j["param_fraction"] = cfg.param_fraction;
  j["max_iter"] = cfg.max_iter;
  j["history_size"] = cfg.history_size;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size.value_or(0);
  j["widths"] = cfg.widths;
  j["n_samples"] = cfg.n_samples;
  j["standardize_targets"] = cfg.standardize_targets;
  j["seed_model"] = cfg.seed_model;
  j["seed_data"] = cfg.seed_data;
  j["seed_opt"] = cfg.seed_opt;
  j["mnist_dir"] = cfg.mnist_dir;
  return j.dump(2);
}

}  // namespace sven::harness
