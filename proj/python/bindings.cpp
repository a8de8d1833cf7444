#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sven/error.hpp"
#include "sven/harness.hpp"
#include "sven/linalg.hpp"
#include "sven/mlp.hpp"
#include "sven/optim.hpp"
#include "sven/selftest.hpp"

namespace py = pybind11;
using namespace sven;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-D array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

Array from_matrix(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array from_vector(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::tuple svd_tuple(const linalg::SvdFactors& f) {
  return py::make_tuple(from_matrix(f.u), from_vector(f.s), from_matrix(f.vt));
}

py::dict split_dict(const Split& s) {
  py::dict d;
  d["inputs"] = from_matrix(s.inputs);
  d["targets"] = from_matrix(s.targets);
  if (!s.labels.empty()) d["labels"] = s.labels;
  return d;
}

py::dict dataset_dict(const data::Dataset& ds) {
  py::dict d;
  d["train"] = split_dict(ds.train);
  d["val"] = split_dict(ds.val);
  d["input_mean"] = ds.input_stats.mean;
  d["input_std"] = ds.input_stats.std;
  return d;
}

harness::RunConfig config_from_dict(const py::dict& options) {
  harness::RunConfig cfg;
  for (const auto& [key, value] : options) {
    const auto name = py::str(key).cast<std::string>();
    std::string text;
    if (py::isinstance<py::bool_>(value)) {
      text = value.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(value) || py::isinstance<py::tuple>(value)) {
      for (const auto& v : value) text += (text.empty() ? "" : ",") + py::str(v).cast<std::string>();
    } else {
      text = py::str(value).cast<std::string>();
    }
    harness::set_option(cfg, name, text);
  }
  return harness::resolve(cfg);
}

py::dict record_dict(const harness::RunRecord& r) {
  py::dict d;
  d["num_params"] = r.num_params;
  d["initial_train_loss"] = r.initial_train_loss;
  d["initial_val_loss"] = r.initial_val_loss;
  py::list epochs;
  for (const auto& e : r.epochs) {
    py::dict row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["val_loss"] = e.val_loss;
    row["cum_wall_s"] = e.cum_wall_s;
    epochs.append(row);
  }
  d["epochs"] = epochs;
  d["final_val_loss"] = r.final_val_loss();
  d["diverged"] = r.diverged;
  d["diverged_epoch"] = r.diverged_epoch;
  d["divergence_reason"] = r.divergence_reason;
  d["config"] = harness::config_json(r.config);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Singular-value descent optimizer and training harness";

  auto base = py::register_exception<Error>(m, "SvenError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("dense_svd", [](const Array& a) { return svd_tuple(linalg::dense_svd(to_matrix(a))); },
        py::arg("a"), "Thin SVD (u, s, vt) with negligible singular values dropped.");
  m.def(
      "randomized_svd",
      [](const Array& a, std::size_t k, double rtol, std::uint64_t seed) {
        return svd_tuple(linalg::randomized_truncated_svd(to_matrix(a), k, rtol, seed));
      },
      py::arg("a"), py::arg("k"), py::arg("rtol") = 0.0, py::arg("seed") = 0);
  m.def(
      "pinv",
      [](const Array& a) { return from_matrix(linalg::pinv_matrix(linalg::dense_svd(to_matrix(a)))); },
      py::arg("a"));

  m.def(
      "sven_step",
      [](const Array& residuals, const Array& jacobian, const Array& theta, double eta,
         std::size_t k, double rtol, std::uint64_t seed, std::uint64_t stream) {
        optim::SvenConfig cfg;
        cfg.eta = eta;
        cfg.k = k;
        cfg.rtol = rtol;
        cfg.seed = seed;
        auto t = to_vector(theta);
        const auto s = optim::sven_step(to_vector(residuals), to_matrix(jacobian), cfg, t, {}, stream);
        return py::make_tuple(from_vector(t), from_vector(s));
      },
      py::arg("residuals"), py::arg("jacobian"), py::arg("theta"), py::arg("eta") = 0.5,
      py::arg("k") = 16, py::arg("rtol") = 1e-3, py::arg("seed") = 0, py::arg("stream") = 0,
      "Returns (updated theta, retained singular values).");
  m.def(
      "natgrad_step",
      [](const Array& residuals, const Array& jacobian, const Array& theta, double eta) {
        auto t = to_vector(theta);
        optim::natgrad_step(to_vector(residuals), to_matrix(jacobian), eta, t);
        return from_vector(t);
      },
      py::arg("residuals"), py::arg("jacobian"), py::arg("theta"), py::arg("eta"));

  py::class_<net::MlpModel>(m, "Mlp")
      .def(py::init([](std::vector<std::size_t> dims, std::uint64_t seed) {
             return net::init_mlp(std::move(dims), seed);
           }),
           py::arg("dims"), py::arg("seed") = 0)
      .def_readonly("layer_dims", &net::MlpModel::layer_dims)
      .def_property_readonly("num_params", &net::MlpModel::num_params)
      .def_property(
          "theta", [](const net::MlpModel& mm) { return from_vector(mm.theta); },
          [](net::MlpModel& mm, const Array& t) {
            auto v = to_vector(t);
            if (v.size() != mm.theta.size()) throw ShapeError("theta length mismatch");
            mm.theta = std::move(v);
          })
      .def(
          "predict",
          [](const net::MlpModel& mm, const Array& x) {
            const Matrix in = to_matrix(x);
            Matrix out(in.rows(), mm.output_dim());
            for (std::size_t i = 0; i < in.rows(); ++i) {
              const auto y = net::predict(mm, in.row(i));
              std::copy(y.begin(), y.end(), out.row(i).begin());
            }
            return from_matrix(out);
          },
          py::arg("x"), "Row-wise forward pass of an (n, input_dim) array.");
  m.def("param_count", [](std::vector<std::size_t> dims) { return net::param_count(dims); });

  m.def(
      "gen_sine1d",
      [](std::size_t n, std::uint64_t seed, bool standardize_targets) {
        return dataset_dict(data::gen_sine1d(n, seed, standardize_targets));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("standardize_targets") = false);
  m.def(
      "gen_poly6",
      [](std::size_t n, std::uint64_t seed, bool standardize_targets) {
        return dataset_dict(data::gen_poly6(n, seed, standardize_targets));
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("standardize_targets") = false);

  m.def(
      "train",
      [](const py::dict& options, const std::string& out_dir) {
        const auto cfg = config_from_dict(options);
        harness::RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = harness::train_run(cfg);
          if (!out_dir.empty()) harness::emit_metrics(rec, out_dir);
        }
        return record_dict(rec);
      },
      py::arg("options") = py::dict(), py::arg("out_dir") = "",
      "Train one configuration given command-line style options, e.g. {'eta': 0.5, 'widths': [16, 16]}.");
  m.def("option_names", &harness::option_names);

  m.def("selftest", [] {
    std::ostringstream os;
    const bool ok = run_selftest(os);
    return py::make_tuple(ok, os.str());
  });
}
