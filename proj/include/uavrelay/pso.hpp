#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "uavrelay/rates.hpp"
#include "uavrelay/rng.hpp"
#include "uavrelay/system.hpp"

namespace uavrelay {

enum class InertiaMode { Constant, Schedule };

struct PsoConfig {
  int particles = 20;
  int iterations = 50;
  double gamma1 = 2.0;  // toward the global best
  double gamma2 = 2.0;  // toward the personal best
  InertiaMode inertia_mode = InertiaMode::Constant;
  double inertia = 1.1;
  double mu_upper = 0.9;
  double mu_lower = 0.4;
  double v_min = -0.2;
  double v_max = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
  double inertia_at(int t) const;
};

/// Copy of `cfg` on an independent substream keyed by `key`.
PsoConfig reseeded(const PsoConfig& cfg, std::uint64_t key);

inline double clip(double x, double lo, double hi) { return std::max(lo, std::min(x, hi)); }

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Particle {
  Eigen::VectorXd position;  // normalized [0,1]^D
  Eigen::VectorXd velocity;
  Eigen::VectorXd best_position;
  double best_value = 0.0;
  Rng rng;
};

struct Swarm {
  std::vector<Particle> particles;
  Eigen::VectorXd best_position;
  double best_value = 0.0;
  int t = 0;

  int dims() const { return static_cast<int>(best_position.size()); }
};

/// Random positions in [0,1]^D and velocities inside the clip range, one
/// RNG substream per particle.
Swarm init_swarm(int dims, const Objective& f, const PsoConfig& cfg);

/// Swarm built from given positions and velocities (tests, warm starts).
Swarm make_swarm(const std::vector<Eigen::VectorXd>& positions, const std::vector<Eigen::VectorXd>& velocities,
                 const Objective& f, const PsoConfig& cfg);

void step(Swarm& swarm, const Objective& f, const PsoConfig& cfg);

struct PsoResult {
  Eigen::VectorXd best;
  double value = 0.0;
  std::vector<double> trace;  // global best after init and after each step
};

PsoResult run_pso(int dims, const Objective& f, const PsoConfig& cfg);

struct PaSolution {
  PowerAlloc alloc;
  RateReport rates;
  std::vector<double> trace;
};

struct LocSolution {
  Point2D location;
  PowerAlloc alloc;
  RateReport rates;
  std::vector<double> trace;
};

/// Power allocation by swarm at a fixed UAV position.
PaSolution solve_pa_fixed_loc(const RealizationFactory& f, Point2D location, const PsoConfig& cfg);

/// UAV position by swarm under equal power allocation.
LocSolution solve_loc_equal_pa(const RealizationFactory& f, const PsoConfig& cfg);

/// UAV position and power allocation searched jointly.
LocSolution solve_joint(const RealizationFactory& f, const PsoConfig& cfg);

enum class GridObjective { Total, FirstLink, SecondLink };

struct GridResult {
  std::vector<double> xs;  // cell centers
  std::vector<double> ys;
  Eigen::MatrixXd surface;  // surface(i, j) at (xs[i], ys[j])
  Point2D best;
  double best_value = 0.0;
};

/// Equal-power objective at the center of every dx-by-dy cell of the search box.
GridResult exhaustive_grid(const RealizationFactory& f, double dx, double dy,
                           GridObjective objective = GridObjective::Total);

}  // namespace uavrelay
