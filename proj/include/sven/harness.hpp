#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sven/data.hpp"
#include "sven/loss.hpp"
#include "sven/optim.hpp"

namespace sven::harness {

/// Everything that determines a training run. Options left unset take
/// per-dataset defaults when the run is resolved (see resolve()).
struct RunConfig {
  data::DatasetKind dataset = data::DatasetKind::Sine1d;
  std::optional<loss::LossKind> loss;  // l2 for regression, label_regression for mnist
  double kappa = 2.0;
  optim::OptimizerKind optimizer = optim::OptimizerKind::Sven;
  double eta = 0.5;
  std::size_t k = 16;
  double rtol = 1e-3;
  std::size_t micro_batch = 1;
  double param_fraction = 1.0;
  int max_iter = 5;
  std::size_t history_size = 10;
  std::size_t epochs = 20;
  std::optional<std::size_t> batch_size;  // 32, or 64 for mnist
  std::vector<std::size_t> widths;        // hidden widths; 3×16, or 3×32 for mnist
  std::size_t n_samples = 10000;          // per split, synthetic datasets only
  bool standardize_targets = false;
  std::uint64_t seed_model = 0;
  std::uint64_t seed_data = 0;
  std::uint64_t seed_opt = 0;
  std::string out_dir;
  std::string mnist_dir = "data/mnist";
};

/// Fills per-dataset defaults and validates every field. Throws ConfigError.
RunConfig resolve(RunConfig cfg);

/// Sets one option by its command-line name (with or without leading
/// dashes), e.g. ("eta", "0.5") or ("--widths", "16,16,16").
void set_option(RunConfig& cfg, std::string_view name, std::string_view value);

/// Names accepted by set_option, without dashes.
const std::vector<std::string>& option_names();

/// JSON rendering of a resolved configuration.
std::string config_json(const RunConfig& cfg);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double cum_wall_s = 0.0;
};

/// Mean of σ_j/σ₁ over the batches of one epoch whose update retained σ_j.
struct SpectrumStat {
  std::size_t epoch = 0;
  std::size_t sv_index = 0;
  double mean_ratio = 0.0;
  std::size_t retained_count = 0;
};

struct RunRecord {
  RunConfig config;  // resolved
  std::size_t num_params = 0;
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  std::vector<EpochMetrics> epochs;  // epochs 1..E, evaluated after each epoch
  std::vector<SpectrumStat> spectra;
  bool diverged = false;
  std::size_t diverged_epoch = 0;
  std::string divergence_reason;
  long line_search_failures = 0;

  /// Validation loss after the last completed epoch (+inf when diverged).
  double final_val_loss() const;
};

data::Dataset make_dataset(const RunConfig& resolved);

/// Runs cfg.epochs passes over the training split. Model, data order and
/// optimizer randomness come from the three seeds only.
RunRecord train_run(const RunConfig& cfg);
RunRecord train_run(const RunConfig& cfg, const data::Dataset& dataset);

/// Writes metrics.csv, spectra.csv and run.json into `dir` (created if
/// missing). Numbers use the shortest round-trip decimal form.
void emit_metrics(const RunRecord& record, const std::filesystem::path& dir);

std::string format_double(double v);

/// Ordered list of (option name, values).
using Grid = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Parses a JSON object mapping option names to arrays of values.
Grid parse_grid_json(std::string_view text);
Grid load_grid(const std::filesystem::path& path);

struct ScanResult {
  std::vector<RunConfig> points;
  std::vector<RunRecord> records;
  std::vector<std::string> point_dirs;
  /// Index of the lowest final validation loss among non-diverged runs.
  std::optional<std::size_t> best;
};

/// Cartesian product of the grid axes over `base`; every point keeps the
/// base seeds. With a non-empty `out_root`, each point is written to its own
/// subdirectory plus scan.csv and best.json at the root. Up to `threads`
/// runs execute concurrently (0 = hardware concurrency).
ScanResult grid_scan(const RunConfig& base, const Grid& grid,
                     const std::filesystem::path& out_root = {}, unsigned threads = 0);

}  // namespace sven::harness
