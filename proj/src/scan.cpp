#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sven/error.hpp"
#include "sven/harness.hpp"

namespace sven::harness {

namespace {

std::string scalar_to_string(const nlohmann::ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    // e.g. "widths": [[16, 16, 16], [32, 32, 32]]
    std::string out;
    for (const auto& e : v) out += (out.empty() ? "" : ",") + scalar_to_string(e);
    return out;
  }
  throw ParseError("grid values must be strings, numbers, booleans or arrays of numbers");
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

std::string dataset_key(const RunConfig& c) {
  std::ostringstream os;
  os << data::to_string(c.dataset) << '|' << c.seed_data << '|' << c.n_samples << '|'
     << c.standardize_targets << '|' << c.mnist_dir;
  return os.str();
}

}  // namespace

Grid parse_grid_json(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid file: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("grid file: expected a JSON object");
  Grid grid;
  for (const auto& [key, values] : j.items()) {
    std::vector<std::string> vals;
    if (values.is_array()) {
      for (const auto& v : values) vals.push_back(scalar_to_string(v));
    } else {
      vals.push_back(scalar_to_string(values));
    }
    if (vals.empty()) throw ParseError("grid file: axis '" + key + "' has no values");
    grid.emplace_back(key, std::move(vals));
  }
  if (grid.empty()) throw ParseError("grid file: no axes");
  return grid;
}

Grid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid_json(ss.str());
}

ScanResult grid_scan(const RunConfig& base, const Grid& grid,
                     const std::filesystem::path& out_root, unsigned threads) {
  if (grid.empty()) throw ConfigError("grid_scan: empty grid");
  ScanResult result;
  std::vector<std::size_t> pos(grid.size(), 0);
  for (;;) {
    RunConfig cfg = base;
    std::ostringstream name;
    name << 'p';
    name.width(3);
    name.fill('0');
    name << result.points.size();
    for (std::size_t a = 0; a < grid.size(); ++a) {
      const auto& value = grid[a].second[pos[a]];
      set_option(cfg, grid[a].first, value);
      std::string key = grid[a].first;
      while (!key.empty() && key.front() == '-') key.erase(key.begin());
      name << '_' << sanitize(key) << '-' << sanitize(value);
    }
    cfg = resolve(cfg);
    if (!out_root.empty()) cfg.out_dir = (out_root / name.str()).string();
    result.points.push_back(std::move(cfg));
    result.point_dirs.push_back(name.str());

    bool carry = true;
    for (std::size_t a = grid.size(); carry && a-- > 0;) {
      carry = ++pos[a] == grid[a].second.size();
      if (carry) pos[a] = 0;
    }
    if (carry) break;
  }

  const std::size_t n = result.points.size();
  result.records.resize(n);
  std::mutex cache_mutex;
  std::map<std::string, std::shared_ptr<const data::Dataset>> cache;
  auto dataset_for = [&](const RunConfig& c) {
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[dataset_key(c)];
    if (!slot) slot = std::make_shared<const data::Dataset>(make_dataset(c));
    return slot;
  };

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto ds = dataset_for(result.points[i]);
        result.records[i] = train_run(result.points[i], *ds);
        if (!out_root.empty()) emit_metrics(result.records[i], result.points[i].out_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = result.records[i];
    if (r.diverged || r.epochs.empty()) continue;
    if (!result.best || r.final_val_loss() < result.records[*result.best].final_val_loss())
      result.best = i;
  }

  if (!out_root.empty()) {
    std::ostringstream csv;
    csv << "point";
    for (const auto& [key, values] : grid) csv << ',' << sanitize(key);
    csv << ",final_val_loss,diverged\n";
    std::vector<std::size_t> idx(grid.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      csv << result.point_dirs[i];
      std::size_t rem = i;
      for (std::size_t a = grid.size(); a-- > 0;) {
        idx[a] = rem % grid[a].second.size();
        rem /= grid[a].second.size();
      }
      for (std::size_t a = 0; a < grid.size(); ++a) {
        std::string v = grid[a].second[idx[a]];
        if (v.find(',') != std::string::npos) v = '"' + v + '"';
        csv << ',' << v;
      }
      csv << ',' << format_double(result.records[i].final_val_loss()) << ','
          << (result.records[i].diverged ? 1 : 0) << '\n';
    }
    std::ofstream(out_root / "scan.csv", std::ios::trunc) << csv.str();

    nlohmann::ordered_json best;
    if (result.best) {
      best["point"] = result.point_dirs[*result.best];
      best["final_val_loss"] = result.records[*result.best].final_val_loss();
      best["config"] = nlohmann::ordered_json::parse(config_json(result.points[*result.best]));
    } else {
      best["point"] = nullptr;
    }
    std::ofstream(out_root / "best.json", std::ios::trunc) << best.dump(2) << '\n';
  }
  return result;
}

}  // namespace sven::harness
