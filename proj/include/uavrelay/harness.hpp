#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "uavrelay/learn.hpp"
#include "uavrelay/pso.hpp"
#include "uavrelay/relay.hpp"

namespace uavrelay {

enum class Scheme { FlEqpa, PsopaFl, PsolEqpa, Psolpa, Dnn, Exhaustive };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

struct ExperimentSettings {
  std::vector<Scheme> schemes{Scheme::FlEqpa, Scheme::PsopaFl, Scheme::PsolEqpa, Scheme::Psolpa};
  std::vector<double> p_t_dbm{20.0};
  int realizations = 100;
  std::uint64_t seed = 1;
  int workers = 1;
  double grid_dx = 5.0;
  double grid_dy = 5.0;
};

struct DnnSettings {
  std::vector<int> hidden{256, 128, 64, 32};
  int samples = 5000;
  TrainConfig train{};
  std::string model_path;
};

struct RelaySettings {
  std::vector<double> queue_bits{8.0};
  std::vector<double> p_t_dbm{10.0, 15.0, 20.0, 25.0, 30.0};
};

struct Config {
  Scenario scenario = Scenario::desk();
  PsoConfig pso{};
  ExperimentSettings experiment{};
  DnnSettings dnn{};
  RelaySettings relay{};
};

Config default_config(bool paper_scale = false);

/// Overlays a JSON document on the defaults. Unknown keys and wrong types
/// raise ErrorKind::Config naming the offending field path.
Config parse_config(const std::string& json_text, bool paper_scale = false);
Config load_config(const std::string& path, bool paper_scale = false);

/// Canonical JSON of the effective configuration.
std::string config_to_json(const Config& cfg);
std::uint64_t config_hash(const Config& cfg);

std::uint64_t realization_seed(std::uint64_t seed, std::size_t index);

struct RealizationRecord {
  Scheme scheme = Scheme::FlEqpa;
  double p_t_dbm = 0.0;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r_total = 0.0;
  Point2D location;
  double seconds = 0.0;  // wall time, kept out of the CSV
};

struct ResultRow {
  Scheme scheme = Scheme::FlEqpa;
  double p_t_dbm = 0.0;
  double mean_r1 = 0.0;
  double mean_r2 = 0.0;
  double mean_r_total = 0.0;
  double std_r_total = 0.0;  // sample std, 0 for one realization
  int realizations = 0;
  double wall_time = 0.0;
};

struct RunResult {
  std::vector<ResultRow> rows;
  std::vector<RealizationRecord> records;
};

/// Runs one scheme on realization `index`; `model` is needed for Scheme::Dnn.
RealizationRecord run_scheme(const Config& cfg, Scheme scheme, double p_t_dbm, std::size_t index,
                             const MlpModel* model = nullptr);

RunResult run_experiment(const Config& cfg, const MlpModel* model = nullptr);

/// Calls fn(i) for i in [0, count) on `workers` threads. Failures are
/// rethrown for the lowest failing index after all work stops.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string rows_to_json(const std::vector<ResultRow>& rows);
std::string records_to_csv(const std::vector<RealizationRecord>& records);

/// Row-major surface with the y centers as header and the x center leading
/// each row, then an argmax line.
std::string surface_to_csv(const GridResult& g);
std::string surface_to_json(const GridResult& g);

GridResult run_grid(const Config& cfg, std::size_t index, double p_t_dbm, GridObjective objective);

enum class DelayPolicy { Fixed, WithoutBuffer, WithBuffer };
std::string_view to_string(DelayPolicy p);

struct DelayRecord {
  double p_t_dbm = 0.0;
  std::size_t index = 0;
  DelayPolicy policy = DelayPolicy::Fixed;
  double r1 = 0.0;
  double r2 = 0.0;
  double r_total = 0.0;
};

struct DelayRow {
  double p_t_dbm = 0.0;
  double queue_bits = 0.0;
  DelayPolicy policy = DelayPolicy::Fixed;
  double mean_r_total = 0.0;
  double mean_delay = 0.0;
  int realizations = 0;
};

struct DelaySweep {
  std::vector<DelayRecord> records;
  std::vector<DelayRow> rows;
};

/// The three policies of every realization at every relay P_T point.
DelaySweep run_delay_sweep(const Config& cfg);
std::string delay_to_csv(const std::vector<DelayRow>& rows);
std::string delay_to_json(const std::vector<DelayRow>& rows);

/// {config_hash, seed, git_describe, timestamps, wall times, ...}.
std::string manifest_json(const Config& cfg, const std::string& command, const std::string& started,
                          const std::string& finished, const std::map<std::string, double>& wall_times);

std::string utc_timestamp();
std::string git_describe();

}  // namespace uavrelay
