#include <doctest.h>

#include <atomic>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uavrelay/error.hpp"
#include "uavrelay/harness.hpp"

using namespace uavrelay;

namespace {

Config quick_config() {
  Config c = default_config();
  c.pso.particles = 8;
  c.pso.iterations = 10;
  c.experiment.realizations = 3;
  return c;
}

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("schemes round-trip through their names") {
  for (auto s : {Scheme::FlEqpa, Scheme::PsopaFl, Scheme::PsolEqpa, Scheme::Psolpa, Scheme::Dnn, Scheme::Exhaustive}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_scheme("nope"), Error);
}

TEST_CASE("config: overlay, round trip and hash") {
  const Config c = parse_config(R"({"experiment": {"realizations": 7, "seed": 99}, "pso": {"particles": 5}})");
  CHECK(c.experiment.realizations == 7);
  CHECK(c.experiment.seed == 99);
  CHECK(c.pso.particles == 5);
  CHECK(c.pso.iterations == PsoConfig{}.iterations);

  const Config back = parse_config(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  Config w = c;
  w.experiment.workers = 8;
  CHECK(config_hash(w) == config_hash(c));
  w.experiment.seed = 100;
  CHECK(config_hash(w) != config_hash(c));
}

TEST_CASE("config: errors name the field") {
  CHECK(kind_of(R"({"experiment": {"realizations": "many"}})") == ErrorKind::Config);
  CHECK(message_of(R"({"experiment": {"realizations": "many"}})").find("experiment.realizations") !=
        std::string::npos);
  CHECK(message_of(R"({"scenario": {"bs": [0, 0, "x"]}})").find("scenario.bs[2]") != std::string::npos);
  CHECK(message_of(R"({"pso": {"partcles": 3}})").find("pso.partcles") != std::string::npos);
  CHECK(kind_of(R"({"experiment": {"realizations": 0}})") == ErrorKind::Config);
  CHECK(kind_of("{not json") == ErrorKind::Config);
}

TEST_CASE("run: one realization gives one row with zero spread") {
  Config c = quick_config();
  c.experiment.realizations = 1;
  c.experiment.schemes = {Scheme::FlEqpa};
  const auto res = run_experiment(c);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].std_r_total == 0.0);
  CHECK(res.rows[0].realizations == 1);
  CHECK(res.records.size() == 1);
  CHECK(res.records[0].seed == realization_seed(c.experiment.seed, 0));
}

TEST_CASE("run: identical seeds give identical CSV across worker counts") {
  Config c = quick_config();
  c.experiment.p_t_dbm = {15.0, 25.0};
  const auto a = rows_to_csv(run_experiment(c).rows);
  c.experiment.workers = 3;
  const auto b = run_experiment(c);
  CHECK(a == rows_to_csv(b.rows));
  CHECK(a.rfind("scheme,p_t_dbm,mean_r1,mean_r2,mean_r_total,std_r_total,realizations\n", 0) == 0);
  CHECK(b.rows.size() == 8);
}

TEST_CASE("run: any record replays in isolation") {
  Config c = quick_config();
  const auto res = run_experiment(c);
  const auto& rec = res.records[5];
  const auto again = run_scheme(c, rec.scheme, rec.p_t_dbm, rec.index);
  CHECK(again.r_total == rec.r_total);
  CHECK(again.seed == rec.seed);
}

TEST_CASE("run: the dnn scheme needs a model") {
  Config c = quick_config();
  CHECK_THROWS_AS(run_scheme(c, Scheme::Dnn, 20.0, 0), Error);
}

TEST_CASE("surface CSV") {
  Config c = quick_config();
  const auto g = run_grid(c, 0, 20.0, GridObjective::Total);
  const auto text = surface_to_csv(g);
  std::istringstream is(text);
  std::string line;
  int lines = 0;
  std::string last;
  while (std::getline(is, line)) {
    ++lines;
    last = line;
  }
  CHECK(lines == static_cast<int>(g.xs.size()) + 2);
  CHECK(last.rfind("argmax,", 0) == 0);

  c.experiment.grid_dx = c.experiment.grid_dy = 1000.0;
  const auto g1 = run_grid(c, 0, 20.0, GridObjective::Total);
  CHECK(g1.surface.size() == 1);
}

TEST_CASE("delay sweep: zero queue and ordering") {
  Config c = quick_config();
  c.experiment.realizations = 2;
  c.relay.queue_bits = {0.0, 8.0};
  c.relay.p_t_dbm = {10.0, 30.0};
  const auto sweep = run_delay_sweep(c);
  CHECK(sweep.rows.size() == 2 * 2 * 3);
  for (const auto& r : sweep.rows) {
    if (r.queue_bits == 0.0) CHECK(r.mean_delay == 0.0);
  }
  CHECK(delay_to_csv(sweep.rows).rfind("p_t_dbm,queue_bits,policy,mean_r_total,mean_delay,realizations\n", 0) == 0);
}

TEST_CASE("parallel_for covers every index and reports the first failure") {
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);

  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 7 || i == 31) throw Error(ErrorKind::ZeroRate, "index " + std::to_string(i));
    });
    FAIL("expected a rethrow");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("index 7") != std::string::npos);
  }
}

TEST_CASE("manifest carries hash, seed and describe") {
  const Config c = quick_config();
  const auto m = nlohmann::json::parse(manifest_json(c, "run", "a", "b", {{"total", 1.5}}));
  CHECK(m.at("seed") == c.experiment.seed);
  CHECK(m.contains("config_hash"));
  CHECK(m.contains("git_describe"));
  CHECK(m.at("wall_time_s").at("total") == 1.5);
}
