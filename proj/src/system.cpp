#include "uavrelay/system.hpp"

#include "uavrelay/error.hpp"
#include "uavrelay/units.hpp"

namespace uavrelay {

namespace {

const Scenario& validated(const Scenario& s) {
  s.validate();
  return s;
}

}  // namespace

RealizationFactory::RealizationFactory(const Scenario& s, std::uint64_t seed)
    : RealizationFactory(s, seed, s.tx_power_dbm) {}

RealizationFactory::RealizationFactory(const Scenario& s, std::uint64_t seed, double tx_power_dbm)
    : channel_(validated(s), seed),
      p_t_mw_(dbm_to_mw(tx_power_dbm)),
      noise_mw_(dbm_to_mw(noise_power_dbm(s))),
      box_(s.box) {
  if (s.angle_model == AngleModel::Fixed) rf_ = build_rf_stages(scenario(), channel_.supports(default_location()));
}

void RealizationFactory::set_box(const DeploymentBox& b) {
  if (b.x_min > b.x_max || b.y_min > b.y_max) throw Error(ErrorKind::InvalidArgument, "search box is inverted");
  if (!scenario().box.contains({b.x_min, b.y_min}) || !scenario().box.contains({b.x_max, b.y_max})) {
    throw Error(ErrorKind::OutOfBox, "search box leaves the deployment box");
  }
  box_ = b;
}

RfStages RealizationFactory::rf_at(Point2D xy) const {
  if (scenario().angle_model == AngleModel::Fixed) return rf_;
  return build_rf_stages(scenario(), channel_.supports(xy));
}

HbfStages RealizationFactory::stages_at(Point2D xy) const {
  const auto ch = channel_.channels_at(xy);
  if (scenario().angle_model == AngleModel::Fixed) return complete_stages(rf_, ch, users(), p_t_mw_, noise_mw_);
  return complete_stages(rf_at(xy), ch, users(), p_t_mw_, noise_mw_);
}

RateReport RealizationFactory::rates(Point2D xy, const PowerAlloc& pa) const {
  return evaluate_rates(stages_at(xy), pa, noise_mw_);
}

RateReport RealizationFactory::rates_equal(Point2D xy) const {
  const auto st = stages_at(xy);
  return evaluate_rates(st, equal_power(st.b_ut, p_t_mw_), noise_mw_);
}

RateReport RealizationFactory::rates_normalized(Point2D xy, const std::vector<double>& p_hat, PowerAlloc* out) const {
  const auto st = stages_at(xy);
  bool any = false;
  for (double v : p_hat) any = any || v > 0.0;
  if (!any) {
    RateReport rep;
    rep.r1 = rate_first_link(st, noise_mw_);
    rep.sinr.assign(p_hat.size(), 0.0);
    if (out != nullptr) out->p.assign(p_hat.size(), 0.0);
    return rep;
  }
  auto pa = scale_to_budget(p_hat, st.b_ut, p_t_mw_);
  auto rep = evaluate_rates(st, pa, noise_mw_);
  if (out != nullptr) *out = std::move(pa);
  return rep;
}

}  // namespace uavrelay
