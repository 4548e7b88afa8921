// Python bindings. Configs cross the boundary as dicts (or JSON text) and
// are overlaid on the defaults exactly like --config files.
#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uavrelay/error.hpp"
#include "uavrelay/harness.hpp"
#include "uavrelay/json_io.hpp"

namespace py = pybind11;
using namespace uavrelay;

namespace {

Config to_config(const py::object& obj, bool paper_scale = false) {
  if (obj.is_none()) return default_config(paper_scale);
  if (py::isinstance<py::str>(obj)) return parse_config(obj.cast<std::string>(), paper_scale);
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return parse_config(text, paper_scale);
}

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::dict rates_dict(const RateReport& r) {
  py::dict d;
  d["r1"] = r.r1;
  d["r2"] = r.r2;
  d["r_total"] = r.r_total;
  d["sinr"] = r.sinr;
  return d;
}

py::dict solution_dict(Point2D loc, const PowerAlloc& pa, const RateReport& r) {
  py::dict d = rates_dict(r);
  d["x"] = loc.x;
  d["y"] = loc.y;
  d["powers_mw"] = pa.p;
  return d;
}

// One realization plus the config it came from, so solvers pick up the
// configured swarm settings on the realization's own substream.
struct PyRealization {
  Config cfg;
  RealizationFactory fac;

  PyRealization(Config c, std::uint64_t seed, std::optional<double> p_t_dbm)
      : cfg(std::move(c)), fac(cfg.scenario, seed, p_t_dbm.value_or(cfg.scenario.tx_power_dbm)) {}

  PsoConfig pso() const { return reseeded(cfg.pso, fac.seed()); }
};

GridObjective parse_objective(const std::string& s) {
  if (s == "total") return GridObjective::Total;
  if (s == "r1") return GridObjective::FirstLink;
  if (s == "r2") return GridObjective::SecondLink;
  throw Error(ErrorKind::InvalidArgument, "objective must be total, r1 or r2");
}

py::dict grid_dict(const GridResult& g) {
  py::dict d;
  d["xs"] = g.xs;
  d["ys"] = g.ys;
  d["surface"] = g.surface;
  d["best"] = py::make_tuple(g.best.x, g.best.y);
  d["best_value"] = g.best_value;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UAV decode-and-forward relay simulator";

  py::register_exception<Error>(m, "UavRelayError", PyExc_RuntimeError);

  m.def(
      "default_config", [](bool paper_scale) { return json_loads(config_to_json(default_config(paper_scale))); },
      py::arg("paper_scale") = false, "Effective default configuration as a dict.");

  m.def(
      "config_hash",
      [](const py::object& cfg) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(to_config(cfg))));
        return std::string(buf);
      },
      py::arg("config") = py::none());

  m.def(
      "run",
      [](const py::object& cfg, const py::object& model) {
        const Config c = to_config(cfg);
        std::optional<MlpModel> mdl;
        if (!model.is_none()) mdl = model.cast<MlpModel>();
        RunResult res;
        {
          py::gil_scoped_release nogil;
          res = run_experiment(c, mdl ? &*mdl : nullptr);
        }
        py::list rows;
        for (const auto& r : res.rows) {
          py::dict d;
          d["scheme"] = std::string(to_string(r.scheme));
          d["p_t_dbm"] = r.p_t_dbm;
          d["mean_r1"] = r.mean_r1;
          d["mean_r2"] = r.mean_r2;
          d["mean_r_total"] = r.mean_r_total;
          d["std_r_total"] = r.std_r_total;
          d["realizations"] = r.realizations;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config") = py::none(), py::arg("model") = py::none(),
      "Monte-Carlo scheme comparison; one dict per (scheme, P_T).");

  m.def(
      "grid",
      [](const py::object& cfg, std::size_t index, std::optional<double> p_t_dbm, const std::string& objective) {
        const Config c = to_config(cfg);
        GridResult g;
        {
          py::gil_scoped_release nogil;
          g = run_grid(c, index, p_t_dbm.value_or(c.scenario.tx_power_dbm), parse_objective(objective));
        }
        return grid_dict(g);
      },
      py::arg("config") = py::none(), py::arg("index") = 0, py::arg("p_t_dbm") = py::none(),
      py::arg("objective") = "total");

  m.def(
      "delay_sweep",
      [](const py::object& cfg) {
        const Config c = to_config(cfg);
        DelaySweep s;
        {
          py::gil_scoped_release nogil;
          s = run_delay_sweep(c);
        }
        py::list rows;
        for (const auto& r : s.rows) {
          py::dict d;
          d["p_t_dbm"] = r.p_t_dbm;
          d["queue_bits"] = r.queue_bits;
          d["policy"] = std::string(to_string(r.policy));
          d["mean_r_total"] = r.mean_r_total;
          d["mean_delay"] = r.mean_delay;
          d["realizations"] = r.realizations;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config") = py::none());

  m.def("little_delay", &little_delay, py::arg("r1"), py::arg("r2"), py::arg("queue_bits"));

  m.def(
      "generate_dataset",
      [](std::size_t n, const std::string& path, const py::object& cfg) {
        const Config c = to_config(cfg);
        py::gil_scoped_release nogil;
        return generate_dataset(n, c.scenario, c.pso, c.experiment.seed, path,
                                DatasetOptions{c.experiment.workers, 256})
            .samples.size();
      },
      py::arg("n"), py::arg("path"), py::arg("config") = py::none(),
      "Writes (or resumes) a JSON-lines dataset of joint-solver labels; returns the sample count.");

  m.def(
      "load_dataset_size", [](const std::string& path) { return load_dataset(path).samples.size(); },
      py::arg("path"));

  py::class_<MlpModel>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return model_from_json(io::read_file(path)); }, py::arg("path"))
      .def(
          "save", [](const MlpModel& mdl, const std::string& path) { io::write_file(path, model_to_json(mdl)); },
          py::arg("path"))
      .def_property_readonly("sizes", [](const MlpModel& mdl) { return mdl.sizes; })
      .def(
          "forward", [](const MlpModel& mdl, const Eigen::VectorXd& x) { return Eigen::VectorXd(forward(mdl, x)); },
          py::arg("features"))
      .def(
          "predict",
          [](const MlpModel& mdl, const PyRealization& r) {
            const auto d = predict_decision(mdl, r.fac);
            return solution_dict(d.location, d.alloc, d.rates);
          },
          py::arg("realization"));

  m.def(
      "train",
      [](const std::string& path, const py::object& cfg, std::optional<std::string> loss) {
        Config c = to_config(cfg);
        if (loss) {
          if (*loss != "mse" && *loss != "mae") throw Error(ErrorKind::InvalidArgument, "loss must be mse or mae");
          c.dnn.train.loss = *loss == "mae" ? LossMode::MAE : LossMode::MSE;
        }
        const auto data = load_dataset(path);
        if (data.samples.empty()) throw Error(ErrorKind::Io, "dataset " + path + " is empty");
        std::vector<int> sizes{static_cast<int>(data.samples.front().features.size())};
        sizes.insert(sizes.end(), c.dnn.hidden.begin(), c.dnn.hidden.end());
        sizes.push_back(data.users + 2);
        MlpModel mdl = make_mlp(sizes, c.dnn.train.seed);
        TrainReport rep;
        {
          py::gil_scoped_release nogil;
          rep = train(mdl, data, c.dnn.train);
        }
        py::dict curves;
        curves["train_loss"] = rep.train_loss;
        curves["val_mse"] = rep.val_mse;
        curves["val_mae"] = rep.val_mae;
        return py::make_tuple(mdl, curves);
      },
      py::arg("dataset"), py::arg("config") = py::none(), py::arg("loss") = py::none(),
      "Trains a fresh network on a dataset file; returns (model, curves).");

  py::class_<PyRealization>(m, "Realization")
      .def(py::init([](const py::object& cfg, std::optional<std::uint64_t> seed, std::optional<std::size_t> index,
                       std::optional<double> p_t_dbm) {
             Config c = to_config(cfg);
             if (seed && index) throw Error(ErrorKind::InvalidArgument, "give seed or index, not both");
             const auto s = seed ? *seed : realization_seed(c.experiment.seed, index.value_or(0));
             return PyRealization(std::move(c), s, p_t_dbm);
           }),
           py::arg("config") = py::none(), py::kw_only(), py::arg("seed") = py::none(), py::arg("index") = py::none(),
           py::arg("p_t_dbm") = py::none())
      .def_property_readonly("seed", [](const PyRealization& r) { return r.fac.seed(); })
      .def_property_readonly("users", [](const PyRealization& r) { return r.fac.users(); })
      .def_property_readonly("tx_power_mw", [](const PyRealization& r) { return r.fac.tx_power_mw(); })
      .def_property_readonly("noise_mw", [](const PyRealization& r) { return r.fac.noise_mw(); })
      .def(
          "rates",
          [](const PyRealization& r, double x, double y, std::optional<std::vector<double>> powers) {
            const Point2D xy{x, y};
            if (!powers) return rates_dict(r.fac.rates_equal(xy));
            return rates_dict(r.fac.rates(xy, PowerAlloc{*powers}));
          },
          py::arg("x"), py::arg("y"), py::arg("powers_mw") = py::none(),
          "Rates at a UAV position; equal power unless powers are given.")
      .def("features", [](const PyRealization& r) { return Eigen::VectorXd(realization_features(r.fac)); })
      .def("solve_joint",
           [](const PyRealization& r) {
             const auto s = solve_joint(r.fac, r.pso());
             return solution_dict(s.location, s.alloc, s.rates);
           })
      .def("solve_location",
           [](const PyRealization& r) {
             const auto s = solve_loc_equal_pa(r.fac, r.pso());
             return solution_dict(s.location, s.alloc, s.rates);
           })
      .def(
          "solve_power",
          [](const PyRealization& r, double x, double y) {
            const auto s = solve_pa_fixed_loc(r.fac, {x, y}, r.pso());
            return solution_dict({x, y}, s.alloc, s.rates);
          },
          py::arg("x"), py::arg("y"))
      .def(
          "grid",
          [](const PyRealization& r, double dx, double dy, const std::string& objective) {
            return grid_dict(exhaustive_grid(r.fac, dx, dy, parse_objective(objective)));
          },
          py::arg("dx") = 5.0, py::arg("dy") = 5.0, py::arg("objective") = "total");
}
