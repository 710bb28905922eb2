#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "based/baselines.hpp"
#include "based/color.hpp"
#include "based/correlation.hpp"
#include "based/crossval.hpp"
#include "based/errors.hpp"
#include "based/features.hpp"
#include "based/forest.hpp"
#include "based/params_io.hpp"
#include "based/png_io.hpp"
#include "based/subjective.hpp"

namespace py = pybind11;
using namespace based;

namespace {

using RgbArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

RgbImage to_rgb(const RgbArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw DimensionError("expected an (H, W, 3) uint8 array");
  RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::memcpy(img.data().data(), a.data(), img.data().size());
  return img;
}

RgbArray from_rgb(const RgbImage& img) {
  RgbArray a({static_cast<py::ssize_t>(img.height()), static_cast<py::ssize_t>(img.width()), py::ssize_t{3}});
  std::memcpy(a.mutable_data(), img.data().data(), img.data().size());
  return a;
}

Plane to_plane(const FloatArray& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
  const auto* p = a.data();
  return Plane(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
               std::vector<double>(p, p + a.size()));
}

FloatArray from_plane(const Plane& p) {
  FloatArray a({static_cast<py::ssize_t>(p.height()), static_cast<py::ssize_t>(p.width())});
  std::memcpy(a.mutable_data(), p.data().data(), p.size() * sizeof(double));
  return a;
}

std::vector<double> to_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw LengthError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

FeatureParams params_arg(const py::object& params) {
  if (params.is_none()) return {};
  if (py::isinstance<py::str>(params)) return params_from_json(params.cast<std::string>());
  const auto json = py::module_::import("json");
  return params_from_json(json.attr("dumps")(params).cast<std::string>());
}

std::vector<TrainingRow> rows_from(const FloatArray& x, const FloatArray& y) {
  if (x.ndim() != 2 || x.shape(1) != static_cast<py::ssize_t>(kFeatureCount)) {
    throw DimensionError("features must be an (n, 9) array");
  }
  const std::vector<double> target = to_vector(y);
  if (target.size() != static_cast<std::size_t>(x.shape(0))) throw LengthError("features and targets differ in length");
  std::vector<TrainingRow> rows(target.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::array<double, kFeatureCount> v{};
    std::copy_n(x.data() + i * kFeatureCount, kFeatureCount, v.begin());
    rows[i] = {FeatureVector::from_values(v), target[i]};
  }
  return rows;
}

TrainConfig make_config(int n_estimators, std::uint64_t seed, bool bootstrap, int max_features,
                        int min_samples_leaf, std::optional<int> max_depth) {
  TrainConfig c;
  c.n_estimators = n_estimators;
  c.seed = seed;
  c.bootstrap = bootstrap;
  c.max_features = max_features;
  c.min_samples_leaf = min_samples_leaf;
  c.max_depth = max_depth;
  c.validate();
  return c;
}

py::dict triple(const CorrelationTriple& t) {
  py::dict d;
  d["plcc"] = t.plcc;
  d["srcc"] = t.srcc;
  d["krcc"] = t.krcc;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reduced-reference deblurring quality features, forest and evaluation";

  auto base = py::register_exception<Error>(m, "BasedError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ParamError>(m, "ParamError", base.ptr());
  py::register_exception<HighpassError>(m, "HighpassError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<LengthError>(m, "LengthError", base.ptr());
  py::register_exception<IdenticalError>(m, "IdenticalError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<FeatureError>(m, "FeatureError", base.ptr());

  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  m.attr("FEATURE_NAMES") = py::tuple(py::cast(names));

  m.def("load_png", [](const std::filesystem::path& p) { return from_rgb(load_png(p)); }, py::arg("path"),
        "Read an 8-bit PNG as an (H, W, 3) uint8 array.");
  m.def("save_png", [](const std::filesystem::path& p, const RgbArray& a) { save_png(p, to_rgb(a)); },
        py::arg("path"), py::arg("image"));
  m.def("to_luma", [](const RgbArray& a) { return from_plane(to_luma(to_rgb(a))); }, py::arg("image"),
        "BT.601 luma of an RGB array as float64.");

  m.def(
      "extract_features",
      [](const RgbArray& blurred, const RgbArray& deblurred, const py::object& params) {
        const FeatureVector fv = extract_all(to_rgb(blurred), to_rgb(deblurred), params_arg(params));
        py::dict out;
        for (std::size_t i = 0; i < kFeatureCount; ++i) out[py::str(std::string(kFeatureNames[i]))] = fv.values()[i];
        return out;
      },
      py::arg("blurred"), py::arg("deblurred"), py::arg("params") = py::none(),
      "The nine features of a (blurred input, deblurred output) pair as a dict.");

  m.def(
      "psnr",
      [](const FloatArray& a, const FloatArray& b, double peak, bool cap_identical) {
        return psnr(to_plane(a), to_plane(b), peak, cap_identical);
      },
      py::arg("a"), py::arg("b"), py::arg("peak") = 255.0, py::arg("cap_identical") = false);
  m.def("ssim", [](const FloatArray& a, const FloatArray& b) { return ssim(to_plane(a), to_plane(b)); },
        py::arg("a"), py::arg("b"));
  m.def("ssim_m", [](const RgbArray& a, const RgbArray& b) { return ssim_m(to_rgb(a), to_rgb(b)); }, py::arg("a"),
        py::arg("b"));

  m.def("pearson", [](const FloatArray& x, const FloatArray& y) { return pearson(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));
  m.def("spearman", [](const FloatArray& x, const FloatArray& y) { return spearman(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));
  m.def("kendall_tau_b",
        [](const FloatArray& x, const FloatArray& y) { return kendall_tau_b(to_vector(x), to_vector(y)); },
        py::arg("x"), py::arg("y"));

  m.def(
      "bt_fit",
      [](const std::vector<std::tuple<std::string, std::string, std::int64_t, std::int64_t, std::int64_t>>& rows,
         double tol, int max_iter) {
        std::vector<PairwiseTally> tallies;
        for (const auto& [a, b, wa, wb, t] : rows) tallies.push_back({a, b, wa, wb, t});
        BtOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        return bt_fit(tallies, opt);
      },
      py::arg("tallies"), py::arg("tol") = 1e-10, py::arg("max_iter") = 10000,
      "Bradley-Terry log-abilities from (a, b, wins_a, wins_b, ties) tuples; the weakest method scores 0.");

  py::class_<RandomForestModel>(m, "Model")
      .def_static(
          "train",
          [](const FloatArray& x, const FloatArray& y, int n_estimators, std::uint64_t seed, bool bootstrap,
             int max_features, int min_samples_leaf, std::optional<int> max_depth, unsigned jobs) {
            const auto config = make_config(n_estimators, seed, bootstrap, max_features, min_samples_leaf, max_depth);
            const auto rows = rows_from(x, y);
            py::gil_scoped_release release;
            return fit(rows, config, jobs);
          },
          py::arg("features"), py::arg("targets"), py::arg("n_estimators") = 220, py::arg("seed") = 42,
          py::arg("bootstrap") = true, py::arg("max_features") = static_cast<int>(kFeatureCount),
          py::arg("min_samples_leaf") = 1, py::arg("max_depth") = py::none(), py::arg("jobs") = 0)
      .def_static("load", [](const std::filesystem::path& p) { return load(p); }, py::arg("path"))
      .def_static("from_json", &RandomForestModel::from_json, py::arg("text"))
      .def("save", [](const RandomForestModel& model, const std::filesystem::path& p) { save(model, p); },
           py::arg("path"))
      .def("to_json", &RandomForestModel::to_json)
      .def(
          "predict",
          [](const RandomForestModel& model, const FloatArray& x) -> py::object {
            if (x.ndim() == 1) {
              if (x.shape(0) != static_cast<py::ssize_t>(kFeatureCount)) throw DimensionError("expected 9 features");
              return py::float_(model.predict(std::span<const double, kFeatureCount>(x.data(), kFeatureCount)));
            }
            if (x.ndim() != 2 || x.shape(1) != static_cast<py::ssize_t>(kFeatureCount)) {
              throw DimensionError("features must be a 9-vector or an (n, 9) array");
            }
            FloatArray out(x.shape(0));
            for (py::ssize_t i = 0; i < x.shape(0); ++i) {
              out.mutable_data()[i] =
                  model.predict(std::span<const double, kFeatureCount>(x.data() + i * kFeatureCount, kFeatureCount));
            }
            return std::move(out);
          },
          py::arg("features"))
      .def_property_readonly("n_trees", [](const RandomForestModel& model) { return model.trees().size(); })
      .def_property_readonly("seed", [](const RandomForestModel& model) { return model.config().seed; });

  m.def(
      "crossval",
      [](const FloatArray& x, const FloatArray& y, int k, std::optional<std::vector<std::string>> groups,
         int n_estimators, std::uint64_t seed, unsigned jobs) {
        const auto rows = rows_from(x, y);
        TrainConfig config;
        config.n_estimators = n_estimators;
        config.seed = seed;
        const std::vector<std::string> keys = groups.value_or(std::vector<std::string>{});
        const CrossValResult res = [&] {
          py::gil_scoped_release release;
          return kfold_cv(rows, k, config, keys, seed, jobs);
        }();
        py::dict out = triple(res.mean);
        py::list folds;
        for (const auto& f : res.folds) {
          py::dict d = triple(f.scores);
          d["n"] = f.n;
          folds.append(d);
        }
        out["n"] = res.n;
        out["folds"] = folds;
        out["assignments"] = res.plan.assignments;
        return out;
      },
      py::arg("features"), py::arg("targets"), py::arg("k") = 5, py::arg("groups") = py::none(),
      py::arg("n_estimators") = 220, py::arg("seed") = 42, py::arg("jobs") = 0,
      "k-fold cross-validation; mean and per-fold PLCC/SRCC/KRCC.");
}
