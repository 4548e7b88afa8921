// Command-line front end: run, grid, dataset, train, predict, delay.
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uavrelay/error.hpp"
#include "uavrelay/harness.hpp"
#include "uavrelay/json_io.hpp"

namespace fs = std::filesystem;
using namespace uavrelay;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string format = "csv";
  std::optional<int> workers;
  bool paper_scale = false;
};

Config resolve(const Globals& g) {
  Config c = g.config.empty() ? default_config(g.paper_scale) : load_config(g.config, g.paper_scale);
  if (g.seed) c.experiment.seed = *g.seed;
  if (g.workers) {
    if (*g.workers < 1) throw Error(ErrorKind::Config, "--workers must be >= 1");
    c.experiment.workers = *g.workers;
  }
  return c;
}

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_manifest(const Globals& g, const Config& c, const std::string& command, const std::string& started,
                    const std::map<std::string, double>& times) {
  io::write_file(out_path(g, "manifest.json"), manifest_json(c, command, started, utc_timestamp(), times));
}

std::optional<MlpModel> maybe_model(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return model_from_json(io::read_file(path));
}

int fail(const std::string& msg, std::string_view kind, int code) {
  nlohmann::json j{{"error", msg}, {"kind", std::string(kind)}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV decode-and-forward relay simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides experiment.seed)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "result format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", g.workers, "worker threads");
  app.add_flag("--paper-scale", g.paper_scale, "start from the full-size preset");

  // run
  auto* run = app.add_subcommand("run", "Monte-Carlo scheme comparison");
  std::vector<std::string> schemes;
  std::optional<int> realizations;
  std::vector<double> run_pt;
  std::string run_model;
  run->add_option("--schemes", schemes, "schemes to run")->delimiter(',');
  run->add_option("--realizations", realizations, "realizations per point");
  run->add_option("--pt", run_pt, "transmit powers, dBm")->delimiter(',');
  run->add_option("--model", run_model, "model checkpoint for the dnn scheme");

  // grid
  auto* grid = app.add_subcommand("grid", "exhaustive location surface for one realization");
  std::optional<double> dx, dy, grid_pt;
  std::size_t grid_index = 0;
  std::string objective = "total";
  grid->add_option("--dx", dx, "grid step along x, m");
  grid->add_option("--dy", dy, "grid step along y, m");
  grid->add_option("--index", grid_index, "realization index");
  grid->add_option("--pt", grid_pt, "transmit power, dBm");
  grid->add_option("--objective", objective, "surface objective")->check(CLI::IsMember({"total", "r1", "r2"}));

  // dataset
  auto* dataset = app.add_subcommand("dataset", "generate joint-solver training data");
  std::optional<int> n_samples;
  dataset->add_option("--n", n_samples, "number of realizations");

  // train
  auto* trn = app.add_subcommand("train", "train the surrogate network");
  std::string data_path;
  std::optional<std::string> loss_name;
  std::optional<int> epochs;
  trn->add_option("--data", data_path, "dataset (JSON lines); defaults to <out>/dataset.jsonl");
  trn->add_option("--loss", loss_name, "loss")->check(CLI::IsMember({"mse", "mae"}));
  trn->add_option("--epochs", epochs, "epochs");

  // predict
  auto* pred = app.add_subcommand("predict", "predict location and powers for one realization");
  std::string pred_model;
  std::size_t pred_index = 0;
  std::optional<double> pred_pt;
  pred->add_option("--model", pred_model, "model checkpoint")->required();
  pred->add_option("--index", pred_index, "realization index");
  pred->add_option("--pt", pred_pt, "transmit power, dBm");

  // delay
  auto* delay = app.add_subcommand("delay", "buffer-aided rate and delay sweep");
  std::vector<double> queue, delay_pt;
  std::optional<int> delay_real;
  delay->add_option("--q", queue, "queue sizes, bits")->delimiter(',');
  delay->add_option("--pt", delay_pt, "transmit powers, dBm")->delimiter(',');
  delay->add_option("--realizations", delay_real, "realizations per point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(e.what(), "Usage", 2);
  }

  try {
    Config cfg = resolve(g);
    const std::string started = utc_timestamp();
    const auto t0 = std::chrono::steady_clock::now();
    const bool json_out = g.format == "json";

    if (run->parsed()) {
      if (!schemes.empty()) {
        cfg.experiment.schemes.clear();
        for (const auto& s : schemes) cfg.experiment.schemes.push_back(parse_scheme(s));
      }
      if (realizations) cfg.experiment.realizations = *realizations;
      if (!run_pt.empty()) cfg.experiment.p_t_dbm = run_pt;
      const auto model = maybe_model(run_model.empty() ? cfg.dnn.model_path : run_model);
      const auto res = run_experiment(cfg, model ? &*model : nullptr);
      io::write_file(out_path(g, json_out ? "results.json" : "results.csv"),
                     json_out ? rows_to_json(res.rows) : rows_to_csv(res.rows));
      io::write_file(out_path(g, "realizations.csv"), records_to_csv(res.records));
      std::map<std::string, double> times{{"total", seconds_since(t0)}};
      for (const auto& r : res.rows) {
        times[std::string(to_string(r.scheme)) + "@" + io::format_double(r.p_t_dbm)] = r.wall_time;
      }
      write_manifest(g, cfg, "run", started, times);
      std::cout << (json_out ? rows_to_json(res.rows) : rows_to_csv(res.rows));
    } else if (grid->parsed()) {
      if (dx) cfg.experiment.grid_dx = *dx;
      if (dy) cfg.experiment.grid_dy = *dy;
      const GridObjective obj = objective == "r1"   ? GridObjective::FirstLink
                                : objective == "r2" ? GridObjective::SecondLink
                                                    : GridObjective::Total;
      const auto surf = run_grid(cfg, grid_index, grid_pt.value_or(cfg.scenario.tx_power_dbm), obj);
      const auto text = json_out ? surface_to_json(surf) : surface_to_csv(surf);
      io::write_file(out_path(g, json_out ? "surface.json" : "surface.csv"), text);
      write_manifest(g, cfg, "grid", started, {{"total", seconds_since(t0)}});
      std::cout << text;
    } else if (dataset->parsed()) {
      const auto n = static_cast<std::size_t>(n_samples.value_or(cfg.dnn.samples));
      if (n < 1) throw Error(ErrorKind::Config, "--n must be >= 1");
      const auto path = out_path(g, "dataset.jsonl");
      const auto d = generate_dataset(n, cfg.scenario, cfg.pso, cfg.experiment.seed, path,
                                      DatasetOptions{cfg.experiment.workers, 256});
      write_manifest(g, cfg, "dataset", started, {{"total", seconds_since(t0)}});
      std::cout << nlohmann::json{{"dataset", path}, {"samples", d.samples.size()},
                                  {"features", d.samples.front().features.size()}}
                       .dump()
                << '\n';
    } else if (trn->parsed()) {
      if (loss_name) cfg.dnn.train.loss = *loss_name == "mae" ? LossMode::MAE : LossMode::MSE;
      if (epochs) cfg.dnn.train.epochs = *epochs;
      const auto path = data_path.empty() ? (fs::path(g.out) / "dataset.jsonl").string() : data_path;
      const auto d = load_dataset(path);
      if (d.samples.empty()) throw Error(ErrorKind::Io, "dataset " + path + " is empty");
      std::vector<int> sizes{static_cast<int>(d.samples.front().features.size())};
      sizes.insert(sizes.end(), cfg.dnn.hidden.begin(), cfg.dnn.hidden.end());
      sizes.push_back(d.users + 2);
      MlpModel m = make_mlp(sizes, cfg.dnn.train.seed);
      const auto rep = train(m, d, cfg.dnn.train);
      io::write_file(out_path(g, "model.json"), model_to_json(m));
      std::ostringstream curves;
      curves << "epoch,train_loss,val_mse,val_mae\n";
      for (std::size_t e = 0; e < rep.train_loss.size(); ++e) {
        curves << e + 1 << ',' << io::format_double(rep.train_loss[e]) << ','
               << (e < rep.val_mse.size() ? io::format_double(rep.val_mse[e]) : "") << ','
               << (e < rep.val_mae.size() ? io::format_double(rep.val_mae[e]) : "") << '\n';
      }
      io::write_file(out_path(g, "curves.csv"), curves.str());
      write_manifest(g, cfg, "train", started, {{"total", seconds_since(t0)}});
      std::cout << curves.str();
    } else if (pred->parsed()) {
      const auto model = model_from_json(io::read_file(pred_model));
      const auto seed = realization_seed(cfg.experiment.seed, pred_index);
      const RealizationFactory f(cfg.scenario, seed, pred_pt.value_or(cfg.scenario.tx_power_dbm));
      const auto d = predict_decision(model, f);
      nlohmann::json j{{"index", pred_index}, {"seed", seed},        {"x", d.location.x}, {"y", d.location.y},
                       {"powers_mw", d.alloc.p}, {"r1", d.rates.r1}, {"r2", d.rates.r2},
                       {"r_total", d.rates.r_total}};
      io::write_file(out_path(g, "prediction.json"), j.dump(2) + "\n");
      std::cout << j.dump(2) << '\n';
    } else if (delay->parsed()) {
      if (!queue.empty()) cfg.relay.queue_bits = queue;
      if (!delay_pt.empty()) cfg.relay.p_t_dbm = delay_pt;
      if (delay_real) cfg.experiment.realizations = *delay_real;
      const auto sweep = run_delay_sweep(cfg);
      const auto text = json_out ? delay_to_json(sweep.rows) : delay_to_csv(sweep.rows);
      io::write_file(out_path(g, json_out ? "delay.json" : "delay.csv"), text);
      write_manifest(g, cfg, "delay", started, {{"total", seconds_since(t0)}});
      std::cout << text;
    }
  } catch (const Error& e) {
    return fail(e.what(), to_string(e.kind()), 1);
  } catch (const std::exception& e) {
    return fail(e.what(), "Internal", 1);
  }
  return 0;
}
