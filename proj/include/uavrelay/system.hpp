#pragma once

#include <cstdint>
#include <vector>

#include "uavrelay/beamforming.hpp"
#include "uavrelay/channel.hpp"
#include "uavrelay/rates.hpp"

namespace uavrelay {

/// One channel realization re-evaluable at any UAV position, with the RF
/// stages and power budget needed to score candidate decisions.
class RealizationFactory {
 public:
  RealizationFactory(const Scenario& s, std::uint64_t seed);
  RealizationFactory(const Scenario& s, std::uint64_t seed, double tx_power_dbm);

  const Scenario& scenario() const { return channel_.scenario(); }
  const ChannelRealization& channel() const { return channel_; }
  std::uint64_t seed() const { return channel_.seed(); }
  int users() const { return scenario().user_count(); }

  double tx_power_mw() const { return p_t_mw_; }
  double noise_mw() const { return noise_mw_; }

  /// Region searched by the location solvers; defaults to the deployment box.
  const DeploymentBox& box() const { return box_; }
  void set_box(const DeploymentBox& b);
  Point2D default_location() const { return {scenario().uav.x, scenario().uav.y}; }

  ChannelPair channels_at(Point2D xy) const { return channel_.channels_at(xy); }
  RfStages rf_at(Point2D xy) const;
  HbfStages stages_at(Point2D xy) const;

  RateReport rates(Point2D xy, const PowerAlloc& pa) const;
  RateReport rates_equal(Point2D xy) const;
  /// Scores normalized powers after rescaling them onto the budget; an
  /// all-zero allocation scores zero.
  RateReport rates_normalized(Point2D xy, const std::vector<double>& p_hat, PowerAlloc* out = nullptr) const;

 private:
  ChannelRealization channel_;
  double p_t_mw_;
  double noise_mw_;
  DeploymentBox box_;
  RfStages rf_;  // used when supports do not depend on position
};

}  // namespace uavrelay
