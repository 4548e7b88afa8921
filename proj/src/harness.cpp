#include "uavrelay/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "uavrelay/error.hpp"
#include "uavrelay/json_io.hpp"
#include "uavrelay/units.hpp"

#ifndef UAVRELAY_GIT_DESCRIBE
#define UAVRELAY_GIT_DESCRIBE "unknown"
#endif

namespace uavrelay {

using io::json;

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::FlEqpa: return "fl_eqpa";
    case Scheme::PsopaFl: return "psopa_fl";
    case Scheme::PsolEqpa: return "psol_eqpa";
    case Scheme::Psolpa: return "psolpa";
    case Scheme::Dnn: return "dnn";
    case Scheme::Exhaustive: return "exhaustive";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (auto s : {Scheme::FlEqpa, Scheme::PsopaFl, Scheme::PsolEqpa, Scheme::Psolpa, Scheme::Dnn, Scheme::Exhaustive}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::Config, "unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(DelayPolicy p) {
  switch (p) {
    case DelayPolicy::Fixed: return "fixed";
    case DelayPolicy::WithoutBuffer: return "without_buffer";
    case DelayPolicy::WithBuffer: return "with_buffer";
  }
  return "unknown";
}

Config default_config(bool paper_scale) {
  Config c;
  if (paper_scale) {
    c.scenario = Scenario::paper_scale();
    c.dnn.hidden = {1024, 512, 256, 128};
    c.dnn.samples = 100000;
    c.experiment.realizations = 2000;
  }
  return c;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  std::string at(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& raw(const char* key) const { return j_.at(key); }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    out = as_number(raw(key), at(key));
  }

  void integer(const char* key, int& out) {
    if (!has(key)) return;
    out = static_cast<int>(as_integer(raw(key), at(key)));
  }

  void u64(const char* key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(at(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const char* key, bool& out) {
    if (!has(key)) return;
    if (!raw(key).is_boolean()) fail(at(key), "expected a boolean");
    out = raw(key).get<bool>();
  }

  void string(const char* key, std::string& out) {
    if (!has(key)) return;
    if (!raw(key).is_string()) fail(at(key), "expected a string");
    out = raw(key).get<std::string>();
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], at(key) + "[" + std::to_string(i) + "]"));
  }

  void integers(const char* key, std::vector<int>& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array of integers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(static_cast<int>(as_integer(v[i], at(key) + "[" + std::to_string(i) + "]")));
    }
  }

  void position(const char* key, Position3D& out) {
    if (!has(key)) return;
    out = as_position(raw(key), at(key));
  }

  void shape(const char* key, UraShape& out) {
    if (!has(key)) return;
    const auto& v = raw(key);
    if (!v.is_array() || v.size() != 2) fail(at(key), "expected [rows, cols]");
    out.rows = static_cast<int>(as_integer(v[0], at(key) + "[0]"));
    out.cols = static_cast<int>(as_integer(v[1], at(key) + "[1]"));
  }

  // Rejects keys that were never asked for.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(at(item.key().c_str()), "unknown field");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Config, path + ": " + msg);
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static std::int64_t as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  static Position3D as_position(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"), as_number(v[2], path + "[2]")};
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_box(Reader& parent, const char* key, DeploymentBox& box) {
  if (!parent.has(key)) return;
  Reader r(parent.raw(key), parent.at(key));
  r.number("x_min", box.x_min);
  r.number("y_min", box.y_min);
  r.number("x_max", box.x_max);
  r.number("y_max", box.y_max);
  r.finish();
}

AngularSupport read_support(const json& j, const std::string& path, AngularSupport sup) {
  Reader r(j, path);
  double elev = rad_to_deg(sup.mean_elev), azim = rad_to_deg(sup.mean_azim);
  double se = rad_to_deg(sup.spread_elev), sa = rad_to_deg(sup.spread_azim);
  r.number("elev_deg", elev);
  r.number("azim_deg", azim);
  r.number("spread_elev_deg", se);
  r.number("spread_azim_deg", sa);
  r.finish();
  return {deg_to_rad(elev), deg_to_rad(azim), deg_to_rad(se), deg_to_rad(sa)};
}

void read_scenario(const json& j, Scenario& s) {
  Reader r(j, "scenario");
  r.position("bs", s.bs);
  r.position("uav", s.uav);
  if (r.has("users")) {
    const auto& v = r.raw("users");
    if (!v.is_array()) Reader::fail("scenario.users", "expected an array of [x, y, z]");
    s.users.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.users.push_back(Reader::as_position(v[i], "scenario.users[" + std::to_string(i) + "]"));
    }
  }
  const auto groups_before = s.group_sizes;
  r.integers("group_sizes", s.group_sizes);
  read_box(r, "box", s.box);
  read_box(r, "user_region", s.user_region);
  r.boolean("randomize_users", s.randomize_users);
  r.number("carrier_freq_hz", s.carrier_freq_hz);
  r.number("bandwidth_hz", s.bandwidth_hz);
  r.number("noise_psd_dbm_hz", s.noise_psd_dbm_hz);
  r.number("ref_pathloss_db", s.ref_pathloss_db);
  r.number("pathloss_exp", s.pathloss_exp);
  r.number("tx_power_dbm", s.tx_power_dbm);
  r.shape("bs_array", s.bs_array);
  r.shape("uav_rx_array", s.uav_rx_array);
  r.shape("uav_tx_array", s.uav_tx_array);
  r.number("element_spacing", s.element_spacing);
  r.integer("first_link_paths", s.first_link_paths);
  r.integer("second_link_paths", s.second_link_paths);
  if (r.has("first_tx_support")) s.first_tx_support = read_support(r.raw("first_tx_support"), r.at("first_tx_support"), s.first_tx_support);
  if (r.has("first_rx_support")) s.first_rx_support = read_support(r.raw("first_rx_support"), r.at("first_rx_support"), s.first_rx_support);
  if (r.has("group_supports")) {
    const auto& v = r.raw("group_supports");
    if (!v.is_array()) Reader::fail("scenario.group_supports", "expected an array of supports");
    s.group_supports.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.group_supports.push_back(read_support(v[i], "scenario.group_supports[" + std::to_string(i) + "]", {}));
    }
  } else if (s.group_sizes != groups_before) {
    s.group_supports = make_group_supports(s.group_count());
  }
  if (r.has("angle_model")) {
    std::string m;
    r.string("angle_model", m);
    if (m == "fixed") {
      s.angle_model = AngleModel::Fixed;
    } else if (m == "geometric") {
      s.angle_model = AngleModel::Geometric;
    } else {
      Reader::fail("scenario.angle_model", "expected \"fixed\" or \"geometric\"");
    }
  }
  r.integer("rf_budget", s.rf_budget);
  r.integer("support_samples", s.support_samples);
  r.number("leakage_threshold", s.leakage_threshold);
  r.finish();
}

void read_pso(const json& j, PsoConfig& p) {
  Reader r(j, "pso");
  r.integer("particles", p.particles);
  r.integer("iterations", p.iterations);
  r.number("gamma1", p.gamma1);
  r.number("gamma2", p.gamma2);
  if (r.has("inertia_mode")) {
    std::string m;
    r.string("inertia_mode", m);
    if (m == "constant") {
      p.inertia_mode = InertiaMode::Constant;
    } else if (m == "schedule") {
      p.inertia_mode = InertiaMode::Schedule;
    } else {
      Reader::fail("pso.inertia_mode", "expected \"constant\" or \"schedule\"");
    }
  }
  r.number("inertia", p.inertia);
  r.number("mu_upper", p.mu_upper);
  r.number("mu_lower", p.mu_lower);
  r.number("v_min", p.v_min);
  r.number("v_max", p.v_max);
  r.u64("seed", p.seed);
  r.finish();
}

void read_experiment(const json& j, ExperimentSettings& e) {
  Reader r(j, "experiment");
  if (r.has("schemes")) {
    const auto& v = r.raw("schemes");
    if (!v.is_array()) Reader::fail("experiment.schemes", "expected an array of scheme names");
    e.schemes.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto path = "experiment.schemes[" + std::to_string(i) + "]";
      if (!v[i].is_string()) Reader::fail(path, "expected a string");
      try {
        e.schemes.push_back(parse_scheme(v[i].get<std::string>()));
      } catch (const Error& err) {
        Reader::fail(path, err.what());
      }
    }
  }
  r.numbers("p_t_dbm", e.p_t_dbm);
  r.integer("realizations", e.realizations);
  r.u64("seed", e.seed);
  r.integer("workers", e.workers);
  r.number("grid_dx", e.grid_dx);
  r.number("grid_dy", e.grid_dy);
  r.finish();
}

void read_dnn(const json& j, DnnSettings& d) {
  Reader r(j, "dnn");
  r.integers("hidden", d.hidden);
  r.integer("samples", d.samples);
  r.integer("epochs", d.train.epochs);
  r.integer("batch_size", d.train.batch_size);
  r.number("lr", d.train.lr);
  r.number("l2", d.train.l2);
  if (r.has("loss")) {
    std::string m;
    r.string("loss", m);
    if (m == "mse") {
      d.train.loss = LossMode::MSE;
    } else if (m == "mae") {
      d.train.loss = LossMode::MAE;
    } else {
      Reader::fail("dnn.loss", "expected \"mse\" or \"mae\"");
    }
  }
  r.number("train_fraction", d.train.train_fraction);
  r.u64("seed", d.train.seed);
  r.string("model_path", d.model_path);
  r.finish();
}

void read_relay(const json& j, RelaySettings& rs) {
  Reader r(j, "relay");
  r.numbers("queue_bits", rs.queue_bits);
  r.numbers("p_t_dbm", rs.p_t_dbm);
  r.finish();
}

void validate(const Config& c) {
  try {
    c.scenario.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("scenario: ") + e.what());
  }
  try {
    c.pso.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("pso: ") + e.what());
  }
  const auto& e = c.experiment;
  if (e.schemes.empty()) Reader::fail("experiment.schemes", "needs at least one scheme");
  if (e.p_t_dbm.empty()) Reader::fail("experiment.p_t_dbm", "needs at least one power");
  if (e.realizations < 1) Reader::fail("experiment.realizations", "must be >= 1");
  if (e.workers < 1) Reader::fail("experiment.workers", "must be >= 1");
  if (!(e.grid_dx > 0.0)) Reader::fail("experiment.grid_dx", "must be positive");
  if (!(e.grid_dy > 0.0)) Reader::fail("experiment.grid_dy", "must be positive");
  if (c.dnn.samples < 1) Reader::fail("dnn.samples", "must be >= 1");
  for (int h : c.dnn.hidden) {
    if (h < 1) Reader::fail("dnn.hidden", "layer widths must be >= 1");
  }
  if (c.dnn.train.epochs < 0) Reader::fail("dnn.epochs", "must be >= 0");
  if (c.dnn.train.batch_size < 1) Reader::fail("dnn.batch_size", "must be >= 1");
  if (!(c.dnn.train.train_fraction > 0.0 && c.dnn.train.train_fraction <= 1.0)) {
    Reader::fail("dnn.train_fraction", "must be in (0, 1]");
  }
  for (double q : c.relay.queue_bits) {
    if (!(q >= 0.0)) Reader::fail("relay.queue_bits", "must be >= 0");
  }
  if (c.relay.p_t_dbm.empty()) Reader::fail("relay.p_t_dbm", "needs at least one power");
}

json support_json(const AngularSupport& s) {
  return {{"elev_deg", rad_to_deg(s.mean_elev)},
          {"azim_deg", rad_to_deg(s.mean_azim)},
          {"spread_elev_deg", rad_to_deg(s.spread_elev)},
          {"spread_azim_deg", rad_to_deg(s.spread_azim)}};
}

json box_json(const DeploymentBox& b) {
  return {{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

json position_json(const Position3D& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace

Config parse_config(const std::string& json_text, bool paper_scale) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  Config c = default_config(paper_scale);
  Reader root(j, "");
  if (root.has("scenario")) read_scenario(root.raw("scenario"), c.scenario);
  if (root.has("pso")) read_pso(root.raw("pso"), c.pso);
  if (root.has("experiment")) read_experiment(root.raw("experiment"), c.experiment);
  if (root.has("dnn")) read_dnn(root.raw("dnn"), c.dnn);
  if (root.has("relay")) read_relay(root.raw("relay"), c.relay);
  root.finish();
  validate(c);
  return c;
}

Config load_config(const std::string& path, bool paper_scale) {
  return parse_config(io::read_file(path), paper_scale);
}

std::string config_to_json(const Config& c) {
  const auto& s = c.scenario;
  json users = json::array();
  for (const auto& u : s.users) users.push_back(position_json(u));
  json groups = json::array();
  for (const auto& g : s.group_supports) groups.push_back(support_json(g));
  json scenario{{"bs", position_json(s.bs)},
                {"uav", position_json(s.uav)},
                {"users", users},
                {"group_sizes", s.group_sizes},
                {"box", box_json(s.box)},
                {"user_region", box_json(s.user_region)},
                {"randomize_users", s.randomize_users},
                {"carrier_freq_hz", s.carrier_freq_hz},
                {"bandwidth_hz", s.bandwidth_hz},
                {"noise_psd_dbm_hz", s.noise_psd_dbm_hz},
                {"ref_pathloss_db", s.ref_pathloss_db},
                {"pathloss_exp", s.pathloss_exp},
                {"tx_power_dbm", s.tx_power_dbm},
                {"bs_array", {s.bs_array.rows, s.bs_array.cols}},
                {"uav_rx_array", {s.uav_rx_array.rows, s.uav_rx_array.cols}},
                {"uav_tx_array", {s.uav_tx_array.rows, s.uav_tx_array.cols}},
                {"element_spacing", s.element_spacing},
                {"first_link_paths", s.first_link_paths},
                {"second_link_paths", s.second_link_paths},
                {"first_tx_support", support_json(s.first_tx_support)},
                {"first_rx_support", support_json(s.first_rx_support)},
                {"group_supports", groups},
                {"angle_model", s.angle_model == AngleModel::Fixed ? "fixed" : "geometric"},
                {"rf_budget", s.rf_budget},
                {"support_samples", s.support_samples},
                {"leakage_threshold", s.leakage_threshold}};
  const auto& p = c.pso;
  json pso{{"particles", p.particles},
           {"iterations", p.iterations},
           {"gamma1", p.gamma1},
           {"gamma2", p.gamma2},
           {"inertia_mode", p.inertia_mode == InertiaMode::Constant ? "constant" : "schedule"},
           {"inertia", p.inertia},
           {"mu_upper", p.mu_upper},
           {"mu_lower", p.mu_lower},
           {"v_min", p.v_min},
           {"v_max", p.v_max},
           {"seed", p.seed}};
  json schemes = json::array();
  for (auto sch : c.experiment.schemes) schemes.push_back(std::string(to_string(sch)));
  const auto& e = c.experiment;
  json experiment{{"schemes", schemes},         {"p_t_dbm", e.p_t_dbm}, {"realizations", e.realizations},
                  {"seed", e.seed},             {"workers", e.workers}, {"grid_dx", e.grid_dx},
                  {"grid_dy", e.grid_dy}};
  const auto& d = c.dnn;
  json dnn{{"hidden", d.hidden},
           {"samples", d.samples},
           {"epochs", d.train.epochs},
           {"batch_size", d.train.batch_size},
           {"lr", d.train.lr},
           {"l2", d.train.l2},
           {"loss", d.train.loss == LossMode::MSE ? "mse" : "mae"},
           {"train_fraction", d.train.train_fraction},
           {"seed", d.train.seed},
           {"model_path", d.model_path}};
  json relay{{"queue_bits", c.relay.queue_bits}, {"p_t_dbm", c.relay.p_t_dbm}};
  return json{{"scenario", scenario}, {"pso", pso}, {"experiment", experiment}, {"dnn", dnn}, {"relay", relay}}
      .dump(2);
}

std::uint64_t config_hash(const Config& cfg) {
  // workers must not change the identity of an experiment
  Config c = cfg;
  c.experiment.workers = 1;
  return io::fnv1a(config_to_json(c));
}

std::uint64_t realization_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, {index}); }

// ---------------------------------------------------------------------------
// experiments

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto work = [&] {
    for (std::size_t i = next++; i < count && !stop; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        stop = true;
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(n, count); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RealizationRecord run_scheme(const Config& cfg, Scheme scheme, double p_t_dbm, std::size_t index,
                             const MlpModel* model) {
  const auto t0 = std::chrono::steady_clock::now();
  RealizationRecord rec;
  rec.scheme = scheme;
  rec.p_t_dbm = p_t_dbm;
  rec.index = index;
  rec.seed = realization_seed(cfg.experiment.seed, index);
  const RealizationFactory f(cfg.scenario, rec.seed, p_t_dbm);
  const PsoConfig pso = reseeded(cfg.pso, rec.seed);

  RateReport rates;
  Point2D loc = f.default_location();
  switch (scheme) {
    case Scheme::FlEqpa:
      rates = f.rates_equal(loc);
      break;
    case Scheme::PsopaFl:
      rates = solve_pa_fixed_loc(f, loc, pso).rates;
      break;
    case Scheme::PsolEqpa: {
      const auto sol = solve_loc_equal_pa(f, pso);
      rates = sol.rates;
      loc = sol.location;
      break;
    }
    case Scheme::Psolpa: {
      const auto sol = solve_joint(f, pso);
      rates = sol.rates;
      loc = sol.location;
      break;
    }
    case Scheme::Dnn: {
      if (model == nullptr) throw Error(ErrorKind::Config, "dnn scheme needs a trained model (dnn.model_path)");
      const auto d = predict_decision(*model, f);
      rates = d.rates;
      loc = d.location;
      break;
    }
    case Scheme::Exhaustive: {
      const auto g = exhaustive_grid(f, cfg.experiment.grid_dx, cfg.experiment.grid_dy);
      loc = g.best;
      rates = f.rates_equal(loc);
      break;
    }
  }
  rec.r1 = rates.r1;
  rec.r2 = rates.r2;
  rec.r_total = rates.r_total;
  rec.location = loc;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

RunResult run_experiment(const Config& cfg, const MlpModel* model) {
  validate(cfg);
  const auto& e = cfg.experiment;
  const std::size_t R = static_cast<std::size_t>(e.realizations);
  const std::size_t per_scheme = e.p_t_dbm.size() * R;
  RunResult out;
  out.records.resize(e.schemes.size() * per_scheme);
  parallel_for(out.records.size(), e.workers, [&](std::size_t i) {
    const auto s = i / per_scheme;
    const auto p = (i % per_scheme) / R;
    out.records[i] = run_scheme(cfg, e.schemes[s], e.p_t_dbm[p], i % R, model);
  });

  for (std::size_t s = 0; s < e.schemes.size(); ++s) {
    for (std::size_t p = 0; p < e.p_t_dbm.size(); ++p) {
      ResultRow row;
      row.scheme = e.schemes[s];
      row.p_t_dbm = e.p_t_dbm[p];
      row.realizations = e.realizations;
      const auto base = s * per_scheme + p * R;
      for (std::size_t r = 0; r < R; ++r) {
        const auto& rec = out.records[base + r];
        row.mean_r1 += rec.r1;
        row.mean_r2 += rec.r2;
        row.mean_r_total += rec.r_total;
        row.wall_time += rec.seconds;
      }
      const double n = static_cast<double>(R);
      row.mean_r1 /= n;
      row.mean_r2 /= n;
      row.mean_r_total /= n;
      double ss = 0.0;
      for (std::size_t r = 0; r < R; ++r) ss += std::pow(out.records[base + r].r_total - row.mean_r_total, 2);
      row.std_r_total = R > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      out.rows.push_back(row);
    }
  }
  return out;
}

namespace {

std::string f(double v) { return io::format_double(v); }

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "scheme,p_t_dbm,mean_r1,mean_r2,mean_r_total,std_r_total,realizations\n";
  for (const auto& r : rows) {
    os << to_string(r.scheme) << ',' << f(r.p_t_dbm) << ',' << f(r.mean_r1) << ',' << f(r.mean_r2)
       << ',' << f(r.mean_r_total) << ',' << f(r.std_r_total) << ',' << r.realizations << '\n';
  }
  return os.str();
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scheme", std::string(to_string(r.scheme))},
                   {"p_t_dbm", r.p_t_dbm},
                   {"mean_r1", r.mean_r1},
                   {"mean_r2", r.mean_r2},
                   {"mean_r_total", r.mean_r_total},
                   {"std_r_total", r.std_r_total},
                   {"realizations", r.realizations}});
  }
  return arr.dump(2) + "\n";
}

std::string records_to_csv(const std::vector<RealizationRecord>& records) {
  std::ostringstream os;
  os << "scheme,p_t_dbm,index,seed,r1,r2,r_total,x,y\n";
  for (const auto& r : records) {
    os << to_string(r.scheme) << ',' << f(r.p_t_dbm) << ',' << r.index << ',' << r.seed << ',' << f(r.r1) << ','
       << f(r.r2) << ',' << f(r.r_total) << ',' << f(r.location.x) << ',' << f(r.location.y) << '\n';
  }
  return os.str();
}

std::string surface_to_csv(const GridResult& g) {
  std::ostringstream os;
  os << "x\\y";
  for (double y : g.ys) os << ',' << f(y);
  os << '\n';
  for (std::size_t i = 0; i < g.xs.size(); ++i) {
    os << f(g.xs[i]);
    for (std::size_t j = 0; j < g.ys.size(); ++j) {
      os << ',' << f(g.surface(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    os << '\n';
  }
  os << "argmax," << f(g.best.x) << ',' << f(g.best.y) << ',' << f(g.best_value) << '\n';
  return os.str();
}

std::string surface_to_json(const GridResult& g) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < g.surface.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(g.surface.cols()));
    for (Eigen::Index j = 0; j < g.surface.cols(); ++j) r[static_cast<std::size_t>(j)] = g.surface(i, j);
    rows.push_back(r);
  }
  return json{{"xs", g.xs}, {"ys", g.ys}, {"surface", rows},
              {"argmax", {{"x", g.best.x}, {"y", g.best.y}, {"value", g.best_value}}}}
             .dump(2) +
         "\n";
}

GridResult run_grid(const Config& cfg, std::size_t index, double p_t_dbm, GridObjective objective) {
  const RealizationFactory fac(cfg.scenario, realization_seed(cfg.experiment.seed, index), p_t_dbm);
  return exhaustive_grid(fac, cfg.experiment.grid_dx, cfg.experiment.grid_dy, objective);
}

DelaySweep run_delay_sweep(const Config& cfg) {
  validate(cfg);
  const auto& pts = cfg.relay.p_t_dbm;
  const std::size_t R = static_cast<std::size_t>(cfg.experiment.realizations);
  DelaySweep out;
  out.records.resize(pts.size() * R * 3);
  parallel_for(pts.size() * R, cfg.experiment.workers, [&](std::size_t i) {
    const auto p = i / R;
    const auto idx = i % R;
    const auto seed = realization_seed(cfg.experiment.seed, idx);
    const RealizationFactory fac(cfg.scenario, seed, pts[p]);
    const PsoConfig pso = reseeded(cfg.pso, seed);
    const auto fixed = fixed_policy(fac);
    const auto single = optimize_without_buffer(fac, pso);
    const auto buffered = optimize_with_buffer(fac, pso, {single, fixed});
    const RelayOutcome* outcomes[3] = {&fixed, &single, &buffered};
    const DelayPolicy policies[3] = {DelayPolicy::Fixed, DelayPolicy::WithoutBuffer, DelayPolicy::WithBuffer};
    for (std::size_t k = 0; k < 3; ++k) {
      out.records[i * 3 + k] =
          DelayRecord{pts[p], idx, policies[k], outcomes[k]->r1, outcomes[k]->r2, outcomes[k]->r_total};
    }
  });

  for (std::size_t p = 0; p < pts.size(); ++p) {
    for (double q : cfg.relay.queue_bits) {
      for (auto policy : {DelayPolicy::Fixed, DelayPolicy::WithoutBuffer, DelayPolicy::WithBuffer}) {
        DelayRow row{pts[p], q, policy, 0.0, 0.0, static_cast<int>(R)};
        for (std::size_t idx = 0; idx < R; ++idx) {
          const auto& rec = out.records[(p * R + idx) * 3 + static_cast<std::size_t>(policy)];
          row.mean_r_total += rec.r_total;
          row.mean_delay += little_delay(rec.r1, rec.r2, q);
        }
        row.mean_r_total /= static_cast<double>(R);
        row.mean_delay /= static_cast<double>(R);
        out.rows.push_back(row);
      }
    }
  }
  return out;
}

std::string delay_to_csv(const std::vector<DelayRow>& rows) {
  std::ostringstream os;
  os << "p_t_dbm,queue_bits,policy,mean_r_total,mean_delay,realizations\n";
  for (const auto& r : rows) {
    os << f(r.p_t_dbm) << ',' << f(r.queue_bits) << ',' << to_string(r.policy) << ',' << f(r.mean_r_total) << ','
       << f(r.mean_delay) << ',' << r.realizations << '\n';
  }
  return os.str();
}

std::string delay_to_json(const std::vector<DelayRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"p_t_dbm", r.p_t_dbm},
                   {"queue_bits", r.queue_bits},
                   {"policy", std::string(to_string(r.policy))},
                   {"mean_r_total", r.mean_r_total},
                   {"mean_delay", r.mean_delay},
                   {"realizations", r.realizations}});
  }
  return arr.dump(2) + "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string git_describe() { return UAVRELAY_GIT_DESCRIBE; }

std::string manifest_json(const Config& cfg, const std::string& command, const std::string& started,
                          const std::string& finished, const std::map<std::string, double>& wall_times) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
  json j{{"command", command},
         {"config_hash", hash.str()},
         {"seed", cfg.experiment.seed},
         {"git_describe", git_describe()},
         {"started", started},
         {"finished", finished},
         {"workers", cfg.experiment.workers},
         {"wall_time_s", wall_times},
         {"realizations_are_per_point", true},
         {"config", json::parse(config_to_json(cfg))}};
  return j.dump(2) + "\n";
}

}  // namespace uavrelay
