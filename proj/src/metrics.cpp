#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sven/error.hpp"
#include "sven/harness.hpp"

namespace sven::harness {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void emit_metrics(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream metrics;
  metrics << "epoch,train_loss,val_loss,cum_wall_s\n";
  for (const auto& e : record.epochs) {
    metrics << e.epoch << ',' << format_double(e.train_loss) << ','
            << format_double(e.val_loss) << ',' << format_double(e.cum_wall_s) << '\n';
  }
  write_text(dir / "metrics.csv", metrics.str());

  std::ostringstream spectra;
  spectra << "epoch,sv_index,mean_ratio,retained_count\n";
  for (const auto& s : record.spectra) {
    spectra << s.epoch << ',' << s.sv_index << ',' << format_double(s.mean_ratio) << ','
            << s.retained_count << '\n';
  }
  write_text(dir / "spectra.csv", spectra.str());

  nlohmann::ordered_json run;
  run["config"] = nlohmann::ordered_json::parse(config_json(record.config));
  run["num_params"] = record.num_params;
  run["initial_train_loss"] = finite_or_null(record.initial_train_loss);
  run["initial_val_loss"] = finite_or_null(record.initial_val_loss);
  run["epochs_completed"] = record.epochs.size();
  run["final_val_loss"] = finite_or_null(record.final_val_loss());
  run["diverged"] = record.diverged;
  run["diverged_epoch"] = record.diverged_epoch;
  run["divergence_reason"] = record.divergence_reason;
  run["line_search_failures"] = record.line_search_failures;
  write_text(dir / "run.json", run.dump(2) + "\n");
}

}  // namespace sven::harness
