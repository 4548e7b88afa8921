#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uavrelay/geometry.hpp"
#include "uavrelay/rng.hpp"

namespace uavrelay {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Phase-ramp sign of a URA steering vector. Transmit beams use exp(+j...),
/// receive beams and the channel array responses use exp(-j...).
enum class Direction { Transmit, Receive };

/// Unnormalized URA steering vector at direction cosines (u, v):
/// x-ramp(u) (x) y-ramp(v), element (ix, iy) at index ix * cols + iy.
CVector steering_from_cosines(double u, double v, UraShape shape, double spacing, Direction dir);

CVector steering_vector(double elev, double azim, UraShape shape, double spacing, Direction dir);

/// Array phase response seen by the propagation channel at either end of a link.
inline CVector array_response(double elev, double azim, UraShape shape, double spacing) {
  return steering_vector(elev, azim, shape, spacing, Direction::Receive);
}

struct PathSet {
  std::vector<double> elev;
  std::vector<double> azim;
  std::vector<cdouble> gain;     // small-scale complex gain
  std::vector<double> distance;  // m

  int count() const { return static_cast<int>(gain.size()); }
};

struct ChannelPair {
  CMatrix h1;  // N_r x N_T
  CMatrix h2;  // K x N_t
  PathSet tx_paths;
  PathSet rx_paths;
  std::vector<PathSet> user_paths;
};

struct ChannelOptions {
  bool apply_pathloss = true;
};

/// Log-distance amplitude factor 10^(-(alpha + 10 eta log10 tau) / 20).
double pathloss_amplitude(const Scenario& s, double tau);

// Location-independent randomness of one realization. Angle offsets are
// uniform in [-1, 1] and scale the support spreads.
struct FirstLinkFading {
  std::vector<double> tx_elev, tx_azim, rx_elev, rx_azim;
  std::vector<cdouble> gain;  // CN(0, 1/L)
};

struct UserFading {
  std::vector<double> elev, azim;
  std::vector<cdouble> gain;  // CN(0, 1/Q)
};

FirstLinkFading draw_first_link_fading(int paths, Rng& rng);
UserFading draw_user_fading(int paths, Rng& rng);

struct FirstLink {
  CMatrix h1;
  PathSet tx_paths;
  PathSet rx_paths;
};

struct SecondLink {
  CMatrix h2;
  std::vector<PathSet> user_paths;
};

FirstLink synthesize_first_link(const Scenario& s, const AngularSupport& tx, const AngularSupport& rx,
                                const FirstLinkFading& fading, Point2D uav_xy, ChannelOptions opts = {});
SecondLink synthesize_second_link(const Scenario& s, const std::vector<AngularSupport>& group_supports,
                                  const std::vector<UserFading>& fading, Point2D uav_xy, ChannelOptions opts = {});

FirstLink draw_first_link(const Scenario& s, const AngularSupport& tx, const AngularSupport& rx, Point2D uav_xy,
                          Rng& rng, ChannelOptions opts = {});
SecondLink draw_second_link(const Scenario& s, const std::vector<AngularSupport>& group_supports, Point2D uav_xy,
                            Rng& rng, ChannelOptions opts = {});

struct LinkSupports {
  AngularSupport first_tx;
  AngularSupport first_rx;
  std::vector<AngularSupport> groups;
};

/// Supports in effect for a UAV position under the scenario's angle model.
LinkSupports supports_at(const Scenario& s, Point2D uav_xy);

/// One network realization: user drop plus all small-scale fading, re-evaluable
/// at any UAV position.
class ChannelRealization {
 public:
  ChannelRealization(Scenario scenario, std::uint64_t seed);

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }
  LinkSupports supports(Point2D uav_xy) const { return supports_at(scenario_, uav_xy); }
  ChannelPair channels_at(Point2D uav_xy, ChannelOptions opts = {}) const;

 private:
  Scenario scenario_;
  std::uint64_t seed_;
  FirstLinkFading first_;
  std::vector<UserFading> users_;
};

std::string channel_to_json(const ChannelPair& ch, std::uint64_t seed);
ChannelPair channel_from_json(const std::string& text, std::uint64_t* seed = nullptr);

}  // namespace uavrelay
