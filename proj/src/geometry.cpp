#include "uavrelay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "uavrelay/error.hpp"
#include "uavrelay/units.hpp"

namespace uavrelay {

double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool DeploymentBox::contains(Point2D p) const {
  return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
}

Point2D DeploymentBox::clamp(Point2D p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

Point2D DeploymentBox::from_unit(double u, double v) const {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  return clamp({x_min + u * width(), y_min + v * height()});
}

std::pair<double, double> DeploymentBox::to_unit(Point2D p) const {
  const double u = width() > 0.0 ? (p.x - x_min) / width() : 0.0;
  const double v = height() > 0.0 ? (p.y - y_min) / height() : 0.0;
  return {u, v};
}

void AngularSupport::validate() const {
  if (spread_elev < 0.0 || spread_azim < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "angular support spreads must be non-negative");
  }
  if (!std::isfinite(mean_elev) || !std::isfinite(mean_azim)) {
    throw Error(ErrorKind::InvalidArgument, "angular support means must be finite");
  }
}

int Scenario::user_count() const { return std::accumulate(group_sizes.begin(), group_sizes.end(), 0); }

std::vector<int> Scenario::user_groups() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(user_count()));
  for (int g = 0; g < group_count(); ++g) {
    for (int i = 0; i < group_sizes[static_cast<std::size_t>(g)]; ++i) out.push_back(g);
  }
  return out;
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (group_sizes.empty()) fail("scenario needs at least one user group");
  for (int k : group_sizes) {
    if (k < 1) fail("every user group needs at least one user");
  }
  if (static_cast<int>(group_supports.size()) != group_count()) {
    std::ostringstream os;
    os << "expected " << group_count() << " group supports, got " << group_supports.size();
    fail(os.str());
  }
  if (!randomize_users && static_cast<int>(users.size()) != user_count()) {
    std::ostringstream os;
    os << "expected " << user_count() << " user positions, got " << users.size();
    fail(os.str());
  }
  if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) fail("deployment box is degenerate");
  if (randomize_users && (!(user_region.x_min <= user_region.x_max) || !(user_region.y_min <= user_region.y_max))) {
    fail("user region is inverted");
  }
  for (const auto& shape : {bs_array, uav_rx_array, uav_tx_array}) {
    if (shape.rows < 1 || shape.cols < 1) fail("array factors must be >= 1");
  }
  if (!(element_spacing > 0.0)) fail("element spacing must be positive");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth must be positive");
  if (first_link_paths < 1 || second_link_paths < 1) fail("path counts must be >= 1");
  if (bs.z < 0.0 || uav.z < 0.0) fail("node altitudes must be >= 0");
  for (const auto& u : users) {
    if (u.z < 0.0) fail("user altitudes must be >= 0");
  }
  if (rf_budget < 1) fail("rf_budget must be >= 1");
  if (support_samples < 2) fail("support_samples must be >= 2");
  first_tx_support.validate();
  first_rx_support.validate();
  for (const auto& g : group_supports) g.validate();
}

std::vector<AngularSupport> make_group_supports(int groups, double azim_start_deg, double azim_step_deg,
                                                double elev_deg, double spread_deg) {
  std::vector<AngularSupport> out;
  for (int g = 0; g < groups; ++g) {
    out.push_back({deg_to_rad(elev_deg), deg_to_rad(azim_start_deg + azim_step_deg * g), deg_to_rad(spread_deg),
                   deg_to_rad(spread_deg)});
  }
  return out;
}

Scenario Scenario::desk() {
  Scenario s;
  const AngularSupport first{deg_to_rad(60.0), deg_to_rad(120.0), deg_to_rad(10.0), deg_to_rad(10.0)};
  s.first_tx_support = first;
  s.first_rx_support = first;
  s.group_supports = make_group_supports(s.group_count());
  return s;
}

Scenario Scenario::paper_scale() {
  Scenario s = desk();
  s.bs_array = s.uav_rx_array = s.uav_tx_array = UraShape{12, 12};
  s.rf_budget = 32;
  return s;
}

LinkDistances distances(const Scenario& s, Point2D uav_xy) {
  if (!s.box.contains(uav_xy)) {
    std::ostringstream os;
    os << "UAV position (" << uav_xy.x << ", " << uav_xy.y << ") outside deployment box";
    throw Error(ErrorKind::OutOfBox, os.str());
  }
  const Position3D uav{uav_xy.x, uav_xy.y, s.uav.z};
  LinkDistances out;
  out.bs_uav = distance(s.bs, uav);
  if (!(out.bs_uav > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "UAV coincides with BS");
  out.uav_user.reserve(s.users.size());
  for (std::size_t k = 0; k < s.users.size(); ++k) {
    const double d = distance(uav, s.users[k]);
    if (!(d > 0.0)) {
      throw Error(ErrorKind::DegenerateGeometry, "UAV coincides with user " + std::to_string(k));
    }
    out.uav_user.push_back(d);
  }
  return out;
}

double noise_power_dbm(const Scenario& s) {
  if (!(s.bandwidth_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  return s.noise_psd_dbm_hz + 10.0 * std::log10(s.bandwidth_hz);
}

std::vector<Position3D> draw_users(int count, const DeploymentBox& region, Rng& rng) {
  std::vector<Position3D> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double x = uniform(rng, region.x_min, region.x_max);
    const double y = uniform(rng, region.y_min, region.y_max);
    out.push_back({x, y, 0.0});
  }
  return out;
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfBox: return "OutOfBox";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::OverlappingSupports: return "OverlappingSupports";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::AllZeroAlloc: return "AllZeroAlloc";
    case ErrorKind::ZeroPrecoder: return "ZeroPrecoder";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonfiniteLoss: return "NonfiniteLoss";
    case ErrorKind::ZeroRate: return "ZeroRate";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace uavrelay
