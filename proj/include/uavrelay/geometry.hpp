#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "uavrelay/rng.hpp"

namespace uavrelay {

struct Position3D {
  double x = 0.0;  // m
  double y = 0.0;
  double z = 0.0;
};

struct Point2D {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Position3D& a, const Position3D& b);

/// Axis-aligned UAV flying span. A collapsed side (min == max) pins that coordinate.
struct DeploymentBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 100.0;
  double y_max = 100.0;

  bool contains(Point2D p) const;
  Point2D clamp(Point2D p) const;
  /// Maps normalized [0,1]^2 coordinates onto the box (clipped).
  Point2D from_unit(double u, double v) const;
  std::pair<double, double> to_unit(Point2D p) const;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

/// Uniform rectangular array factorization N = rows * cols.
struct UraShape {
  int rows = 1;  // x axis
  int cols = 1;  // y axis

  int size() const { return rows * cols; }
};

/// Mean direction and half-width of a cluster, radians.
struct AngularSupport {
  double mean_elev = 0.0;
  double mean_azim = 0.0;
  double spread_elev = 0.0;
  double spread_azim = 0.0;

  double elev_lo() const { return mean_elev - spread_elev; }
  double elev_hi() const { return mean_elev + spread_elev; }
  double azim_lo() const { return mean_azim - spread_azim; }
  double azim_hi() const { return mean_azim + spread_azim; }
  void validate() const;
};

enum class AngleModel {
  Fixed,      // supports held at their configured means for every UAV position
  Geometric,  // means recentered on the line of sight for each UAV position
};

struct Scenario {
  Position3D bs{0.0, 0.0, 10.0};
  Position3D uav{50.0, 50.0, 20.0};
  std::vector<Position3D> users;
  std::vector<int> group_sizes{2, 2};
  DeploymentBox box{};
  // Region used when users are drawn per realization, at ground level.
  DeploymentBox user_region{50.0, 50.0, 100.0, 100.0};
  bool randomize_users = true;

  double carrier_freq_hz = 28e9;
  double bandwidth_hz = 100e6;
  double noise_psd_dbm_hz = -174.0;
  double ref_pathloss_db = 61.34;
  double pathloss_exp = 3.6;
  double tx_power_dbm = 20.0;

  UraShape bs_array{4, 4};
  UraShape uav_rx_array{4, 4};
  UraShape uav_tx_array{4, 4};
  double element_spacing = 0.5;  // wavelengths

  int first_link_paths = 10;   // L
  int second_link_paths = 10;  // Q
  AngularSupport first_tx_support{};
  AngularSupport first_rx_support{};
  std::vector<AngularSupport> group_supports;
  AngleModel angle_model = AngleModel::Fixed;

  int rf_budget = 16;  // cap on RF chains per stage
  int support_samples = 200;
  double leakage_threshold = 0.1;

  int user_count() const;
  int group_count() const { return static_cast<int>(group_sizes.size()); }
  /// Group index of every user, users ordered group by group.
  std::vector<int> user_groups() const;
  void validate() const;

  /// Desk-scale defaults: 4x4 arrays, K = 4 in two groups.
  static Scenario desk();
  /// Full-size arrays (12x12) with the same supports.
  static Scenario paper_scale();
};

/// Second-link group supports: azimuth start + step*g, common elevation and spread (degrees).
std::vector<AngularSupport> make_group_supports(int groups, double azim_start_deg = 21.0,
                                                double azim_step_deg = 120.0, double elev_deg = 60.0,
                                                double spread_deg = 10.0);

struct LinkDistances {
  double bs_uav = 0.0;
  std::vector<double> uav_user;
};

/// 3D link lengths for a UAV at `uav_xy` and altitude `s.uav.z`.
LinkDistances distances(const Scenario& s, Point2D uav_xy);

/// Thermal noise over the channel bandwidth, dBm.
double noise_power_dbm(const Scenario& s);

std::vector<Position3D> draw_users(int count, const DeploymentBox& region, Rng& rng);

}  // namespace uavrelay
