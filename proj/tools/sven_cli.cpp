// Command-line front end: train, scan, data gen|fetch, selftest.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "sven/data.hpp"
#include "sven/error.hpp"
#include "sven/harness.hpp"
#include "sven/selftest.hpp"

namespace fs = std::filesystem;
using namespace sven;

namespace {

constexpr const char* kDefaultMnistUrl = "https://ossci-datasets.s3.amazonaws.com/mnist/";

const std::map<std::string, std::string> kOptionHelp = {
    {"dataset", "sine1d, poly6 or mnist"},
    {"loss", "l2, label_regression or cross_entropy"},
    {"optimizer", "sven, natgrad, sgd, polyak, rmsprop, adam or lbfgs"},
    {"eta", "Learning rate (initial step for lbfgs)"},
    {"k", "Singular triplets kept by sven"},
    {"rtol", "Drop singular values below rtol times the largest"},
    {"kappa", "Effective residual exponent"},
    {"micro-batch", "Samples per condition"},
    {"param-fraction", "Fraction of parameters updated per step"},
    {"max-iter", "L-BFGS iterations per batch"},
    {"history-size", "L-BFGS curvature pairs kept"},
    {"epochs", "Passes over the training split"},
    {"batch-size", "Samples per batch"},
    {"widths", "Comma-separated hidden widths"},
    {"n-samples", "Samples per split for synthetic data"},
    {"seed-model", "Initialization seed"},
    {"seed-data", "Data generation and shuffling seed"},
    {"seed-opt", "Optimizer seed"},
    {"out", "Output directory"},
    {"mnist-dir", "Directory with the MNIST IDX files"},
};

// Registers every run option on `cmd`; values land in `values` by name.
void add_run_options(CLI::App* cmd, std::map<std::string, std::string>& values) {
  for (const auto& name : harness::option_names()) {
    if (name == "standardize-targets") {
      cmd->add_flag_callback("--standardize-targets", [&values] { values["standardize-targets"] = "true"; },
                             "Standardize regression targets with train statistics");
      continue;
    }
    const auto help = kOptionHelp.find(name);
    cmd->add_option("--" + name, values[name], help == kOptionHelp.end() ? "" : help->second);
  }
}

harness::RunConfig build_config(const std::map<std::string, std::string>& values) {
  harness::RunConfig cfg;
  for (const auto& [name, value] : values)
    if (!value.empty()) harness::set_option(cfg, name, value);
  return cfg;
}

int cmd_train(const std::map<std::string, std::string>& values) {
  harness::RunConfig cfg = harness::resolve(build_config(values));
  if (cfg.out_dir.empty()) cfg.out_dir = "sven_run";
  const auto record = harness::train_run(cfg);
  harness::emit_metrics(record, cfg.out_dir);
  std::cout << "params " << record.num_params << "  initial val " << harness::format_double(record.initial_val_loss);
  if (!record.epochs.empty()) std::cout << "  final val " << harness::format_double(record.epochs.back().val_loss);
  std::cout << '\n';
  if (record.diverged)
    std::cout << "diverged at epoch " << record.diverged_epoch << ": " << record.divergence_reason << '\n';
  std::cout << "wrote " << cfg.out_dir << '\n';
  return 0;
}

int cmd_scan(const std::map<std::string, std::string>& values, const std::string& grid_path,
             unsigned threads) {
  harness::RunConfig base = build_config(values);
  const fs::path out_root = base.out_dir.empty() ? fs::path("sven_scan") : fs::path(base.out_dir);
  base.out_dir.clear();
  const auto grid = harness::load_grid(grid_path);
  fs::create_directories(out_root);
  const auto result = harness::grid_scan(base, grid, out_root, threads);
  std::size_t diverged = 0;
  for (const auto& r : result.records) diverged += r.diverged ? 1 : 0;
  std::cout << result.points.size() << " points, " << diverged << " diverged\n";
  if (result.best)
    std::cout << "best " << result.point_dirs[*result.best] << "  val "
              << harness::format_double(result.records[*result.best].final_val_loss()) << '\n';
  std::cout << "wrote " << out_root.string() << '\n';
  return 0;
}

int cmd_data_gen(const std::string& dataset, std::size_t n, std::uint64_t seed, const fs::path& out,
                 bool standardize_targets) {
  harness::RunConfig cfg;
  cfg.dataset = data::parse_dataset_kind(dataset);
  if (cfg.dataset == data::DatasetKind::Mnist)
    throw ConfigError("data gen covers synthetic datasets; use 'data fetch' for mnist");
  cfg.n_samples = n;
  cfg.seed_data = seed;
  cfg.standardize_targets = standardize_targets;
  const auto ds = harness::make_dataset(harness::resolve(cfg));
  fs::create_directories(out);
  data::write_matrix_bin(out / "train_inputs.bin", ds.train.inputs);
  data::write_matrix_bin(out / "train_targets.bin", ds.train.targets);
  data::write_matrix_bin(out / "val_inputs.bin", ds.val.inputs);
  data::write_matrix_bin(out / "val_targets.bin", ds.val.targets);
  std::cout << "wrote " << ds.train.size() << " + " << ds.val.size() << " samples to " << out.string() << '\n';
  return 0;
}

int cmd_data_fetch(const fs::path& out, std::string url) {
  if (!url.empty() && url.back() != '/') url += '/';
  fs::create_directories(out);
  for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                           "t10k-labels-idx1-ubyte"}) {
    const fs::path target = out / name;
    if (fs::exists(target)) {
      std::cout << "have " << target.string() << '\n';
      continue;
    }
    const std::string cmd = "curl -fsSL '" + url + name + ".gz' | gunzip > '" + target.string() + ".part'";
    std::cout << "fetch " << url << name << ".gz\n";
    if (std::system(cmd.c_str()) != 0) {
      fs::remove(target.string() + ".part");
      throw IoError("download failed: " + url + name + ".gz");
    }
    fs::rename(target.string() + ".part", target);
  }
  data::load_mnist(out);
  std::cout << "mnist ready in " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sven optimizer laboratory", "sven"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::map<std::string, std::string> train_values;
  auto* train = app.add_subcommand("train", "Train one configuration and write metrics");
  add_run_options(train, train_values);

  std::map<std::string, std::string> scan_values;
  std::string grid_path;
  unsigned threads = 0;
  auto* scan = app.add_subcommand("scan", "Run every point of a hyperparameter grid");
  scan->add_option("--grid", grid_path, "JSON object mapping option names to value arrays")->required();
  scan->add_option("--threads", threads, "Concurrent runs (0 = all cores)");
  add_run_options(scan, scan_values);

  auto* data_cmd = app.add_subcommand("data", "Dataset utilities");
  data_cmd->require_subcommand(1);
  std::string gen_dataset = "sine1d";
  std::size_t gen_n = 10000;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "data/gen";
  bool gen_standardize = false;
  auto* gen = data_cmd->add_subcommand("gen", "Write a synthetic dataset as binary matrices");
  gen->add_option("--dataset", gen_dataset, "sine1d or poly6");
  gen->add_option("--n", gen_n, "Samples per split");
  gen->add_option("--seed", gen_seed, "Data seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_flag("--standardize-targets", gen_standardize);
  std::string fetch_out = "data/mnist";
  std::string fetch_url = kDefaultMnistUrl;
  auto* fetch = data_cmd->add_subcommand("fetch", "Download the MNIST IDX files (needs curl and gunzip)");
  fetch->add_option("--out", fetch_out, "Output directory");
  fetch->add_option("--url", fetch_url, "Base URL of the gzipped IDX files");

  auto* selftest = app.add_subcommand("selftest", "Run quick numerical checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(train_values);
    if (*scan) return cmd_scan(scan_values, grid_path, threads);
    if (*gen) return cmd_data_gen(gen_dataset, gen_n, gen_seed, gen_out, gen_standardize);
    if (*fetch) return cmd_data_fetch(fetch_out, fetch_url);
    if (*selftest) return run_selftest(std::cout) ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
