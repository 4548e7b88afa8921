#include "uavrelay/pso.hpp"

#include <cmath>
#include <limits>

#include "uavrelay/error.hpp"

namespace uavrelay {

void PsoConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (particles < 1) fail("pso.particles must be >= 1");
  if (iterations < 1) fail("pso.iterations must be >= 1");
  if (gamma1 < 0.0 || gamma2 < 0.0) fail("pso learning factors must be >= 0");
  if (!(v_min < v_max)) fail("pso velocity clip needs v_min < v_max");
}

double PsoConfig::inertia_at(int t) const {
  if (inertia_mode == InertiaMode::Constant) return inertia;
  return mu_upper - (static_cast<double>(t) / iterations) * (mu_upper - mu_lower);
}

PsoConfig reseeded(const PsoConfig& cfg, std::uint64_t key) {
  PsoConfig out = cfg;
  out.seed = derive_seed(cfg.seed, {key});
  return out;
}

namespace {

void seed_bests(Swarm& s) {
  s.best_value = -std::numeric_limits<double>::infinity();
  for (const auto& p : s.particles) {
    if (p.best_value > s.best_value) {
      s.best_value = p.best_value;
      s.best_position = p.best_position;
    }
  }
}

}  // namespace

Swarm make_swarm(const std::vector<Eigen::VectorXd>& positions, const std::vector<Eigen::VectorXd>& velocities,
                 const Objective& f, const PsoConfig& cfg) {
  cfg.validate();
  if (positions.empty() || positions.size() != velocities.size()) {
    throw Error(ErrorKind::ShapeMismatch, "swarm needs one velocity per position");
  }
  Swarm s;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Particle p;
    p.rng.seed(derive_seed(cfg.seed, {i}));
    p.position = positions[i].unaryExpr([](double x) { return clip(x, 0.0, 1.0); });
    p.velocity = velocities[i];
    p.best_position = p.position;
    p.best_value = f(p.position);
    s.particles.push_back(std::move(p));
  }
  seed_bests(s);
  return s;
}

Swarm init_swarm(int dims, const Objective& f, const PsoConfig& cfg) {
  cfg.validate();
  if (dims < 1) throw Error(ErrorKind::InvalidArgument, "swarm dimension must be >= 1");
  Swarm s;
  for (int i = 0; i < cfg.particles; ++i) {
    Particle p;
    p.rng.seed(derive_seed(cfg.seed, {static_cast<std::uint64_t>(i)}));
    p.position.resize(dims);
    p.velocity.resize(dims);
    for (int d = 0; d < dims; ++d) p.position(d) = uniform01(p.rng);
    for (int d = 0; d < dims; ++d) p.velocity(d) = uniform(p.rng, cfg.v_min, cfg.v_max);
    p.best_position = p.position;
    p.best_value = f(p.position);
    s.particles.push_back(std::move(p));
  }
  seed_bests(s);
  return s;
}

void step(Swarm& s, const Objective& f, const PsoConfig& cfg) {
  const double inertia = cfg.inertia_at(s.t);
  for (auto& p : s.particles) {
    for (Eigen::Index d = 0; d < p.position.size(); ++d) {
      const double y1 = uniform01(p.rng);
      const double y2 = uniform01(p.rng);
      const double v = cfg.gamma1 * y1 * (s.best_position(d) - p.position(d)) +
                       cfg.gamma2 * y2 * (p.best_position(d) - p.position(d)) + inertia * p.velocity(d);
      p.velocity(d) = clip(v, cfg.v_min, cfg.v_max);
      p.position(d) = clip(p.position(d) + p.velocity(d), 0.0, 1.0);
    }
    const double value = f(p.position);
    if (value > p.best_value) {
      p.best_value = value;
      p.best_position = p.position;
    }
  }
  // synchronous global update after the whole sweep
  for (const auto& p : s.particles) {
    if (p.best_value > s.best_value) {
      s.best_value = p.best_value;
      s.best_position = p.best_position;
    }
  }
  ++s.t;
}

PsoResult run_pso(int dims, const Objective& f, const PsoConfig& cfg) {
  Swarm s = init_swarm(dims, f, cfg);
  PsoResult out;
  out.trace.push_back(s.best_value);
  for (int t = 0; t < cfg.iterations; ++t) {
    step(s, f, cfg);
    out.trace.push_back(s.best_value);
  }
  out.best = s.best_position;
  out.value = s.best_value;
  return out;
}

namespace {

std::vector<double> squared(const Eigen::VectorXd& x, Eigen::Index from, Eigen::Index count) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < count; ++i) out.push_back(x(from + i) * x(from + i));
  return out;
}

}  // namespace

PaSolution solve_pa_fixed_loc(const RealizationFactory& f, Point2D location, const PsoConfig& cfg) {
  const int K = f.users();
  const HbfStages st = f.stages_at(location);
  const double noise = f.noise_mw();
  const double r1 = rate_first_link(st, noise);
  // R1 does not depend on the second-link powers, so it is computed once.
  Objective obj = [&](const Eigen::VectorXd& x) {
    const auto p_hat = squared(x, 0, K);
    bool any = false;
    for (double v : p_hat) any = any || v > 0.0;
    if (!any) return 0.0;
    const auto pa = scale_to_budget(p_hat, st.b_ut, f.tx_power_mw());
    return df_rate(r1, rate_second_link(st, pa, noise));
  };
  const auto res = run_pso(K, obj, cfg);
  PaSolution out;
  const auto p_hat = squared(res.best, 0, K);
  bool any = false;
  for (double v : p_hat) any = any || v > 0.0;
  out.alloc = any ? scale_to_budget(p_hat, st.b_ut, f.tx_power_mw()) : equal_power(st.b_ut, f.tx_power_mw());
  out.rates = evaluate_rates(st, out.alloc, noise);
  out.trace = res.trace;
  return out;
}

LocSolution solve_loc_equal_pa(const RealizationFactory& f, const PsoConfig& cfg) {
  const auto& box = f.box();
  Objective obj = [&](const Eigen::VectorXd& x) { return f.rates_equal(box.from_unit(x(0), x(1))).r_total; };
  const auto res = run_pso(2, obj, cfg);
  LocSolution out;
  out.location = box.from_unit(res.best(0), res.best(1));
  const auto st = f.stages_at(out.location);
  out.alloc = equal_power(st.b_ut, f.tx_power_mw());
  out.rates = evaluate_rates(st, out.alloc, f.noise_mw());
  out.trace = res.trace;
  return out;
}

LocSolution solve_joint(const RealizationFactory& f, const PsoConfig& cfg) {
  const int K = f.users();
  const auto& box = f.box();
  Objective obj = [&](const Eigen::VectorXd& x) {
    return f.rates_normalized(box.from_unit(x(0), x(1)), squared(x, 2, K)).r_total;
  };
  const auto res = run_pso(K + 2, obj, cfg);
  LocSolution out;
  out.location = box.from_unit(res.best(0), res.best(1));
  const auto st = f.stages_at(out.location);
  const auto p_hat = squared(res.best, 2, K);
  bool any = false;
  for (double v : p_hat) any = any || v > 0.0;
  out.alloc = any ? scale_to_budget(p_hat, st.b_ut, f.tx_power_mw()) : equal_power(st.b_ut, f.tx_power_mw());
  out.rates = evaluate_rates(st, out.alloc, f.noise_mw());
  out.trace = res.trace;
  return out;
}

GridResult exhaustive_grid(const RealizationFactory& f, double dx, double dy, GridObjective objective) {
  if (!(dx > 0.0) || !(dy > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid steps must be positive");
  const auto& box = f.box();
  auto centers = [](double lo, double hi, double step) {
    const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / step - 1e-9)));
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(std::min(hi, lo + (i + 0.5) * step));
    return out;
  };
  GridResult g;
  g.xs = centers(box.x_min, box.x_max, dx);
  g.ys = centers(box.y_min, box.y_max, dy);
  g.surface.resize(static_cast<Eigen::Index>(g.xs.size()), static_cast<Eigen::Index>(g.ys.size()));
  g.best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.xs.size(); ++i) {
    for (std::size_t j = 0; j < g.ys.size(); ++j) {
      const Point2D xy{g.xs[i], g.ys[j]};
      const auto rep = f.rates_equal(xy);
      double v = rep.r_total;
      if (objective == GridObjective::FirstLink) v = rep.r1;
      if (objective == GridObjective::SecondLink) v = rep.r2;
      g.surface(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      if (v > g.best_value) {
        g.best_value = v;
        g.best = xy;
      }
    }
  }
  return g;
}

}  // namespace uavrelay
