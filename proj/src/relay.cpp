#include "uavrelay/relay.hpp"

#include <algorithm>

#include "uavrelay/error.hpp"

namespace uavrelay {

RelayOutcome buffered_rate(const RealizationFactory& f, const BufferPolicy& policy, const PowerAlloc& alloc) {
  RelayOutcome out;
  out.policy = policy;
  const Point2D tx = policy.mode == BufferMode::WithBuffer ? policy.loc_tx : policy.loc_rx;
  out.policy.loc_tx = tx;
  const auto st_rx = f.stages_at(policy.loc_rx);
  out.r1 = rate_first_link(st_rx, f.noise_mw());
  const auto st_tx = f.stages_at(tx);
  out.alloc = alloc.p.empty() ? equal_power(st_tx.b_ut, f.tx_power_mw()) : alloc;
  out.r2 = rate_second_link(st_tx, out.alloc, f.noise_mw());
  out.r_total = df_rate(out.r1, out.r2);
  return out;
}

RelayOutcome fixed_policy(const RealizationFactory& f) {
  return buffered_rate(f, BufferPolicy{BufferMode::WithoutBuffer, f.default_location(), f.default_location(), 0.0});
}

RelayOutcome optimize_without_buffer(const RealizationFactory& f, const PsoConfig& cfg) {
  const auto sol = solve_joint(f, cfg);
  return buffered_rate(f, BufferPolicy{BufferMode::WithoutBuffer, sol.location, sol.location, 0.0}, sol.alloc);
}

RelayOutcome optimize_with_buffer(const RealizationFactory& f, const PsoConfig& cfg,
                                  const std::vector<RelayOutcome>& incumbents) {
  const int K = f.users();
  const auto& box = f.box();

  // first hop: R1 alone, independent of the second-hop powers
  Objective r1_obj = [&](const Eigen::VectorXd& x) {
    return rate_first_link(f.stages_at(box.from_unit(x(0), x(1))), f.noise_mw());
  };
  const auto rx = run_pso(2, r1_obj, reseeded(cfg, 1));
  Point2D loc_rx = box.from_unit(rx.best(0), rx.best(1));
  double r1 = rate_first_link(f.stages_at(loc_rx), f.noise_mw());

  // second hop: location and powers for R2
  Objective r2_obj = [&](const Eigen::VectorXd& x) {
    std::vector<double> p_hat;
    for (int k = 0; k < K; ++k) p_hat.push_back(x(2 + k) * x(2 + k));
    return f.rates_normalized(box.from_unit(x(0), x(1)), p_hat).r2;
  };
  const auto tx = run_pso(K + 2, r2_obj, reseeded(cfg, 2));
  Point2D loc_tx = box.from_unit(tx.best(0), tx.best(1));
  PowerAlloc alloc;
  std::vector<double> p_hat;
  for (int k = 0; k < K; ++k) p_hat.push_back(tx.best(2 + k) * tx.best(2 + k));
  double r2 = f.rates_normalized(loc_tx, p_hat, &alloc).r2;
  if (std::all_of(p_hat.begin(), p_hat.end(), [](double v) { return v == 0.0; })) {
    alloc = equal_power(f.stages_at(loc_tx).b_ut, f.tx_power_mw());
    r2 = rate_second_link(f.stages_at(loc_tx), alloc, f.noise_mw());
  }

  for (const auto& inc : incumbents) {
    if (inc.r1 > r1) {
      r1 = inc.r1;
      loc_rx = inc.policy.loc_rx;
    }
    if (inc.r2 > r2) {
      r2 = inc.r2;
      loc_tx = inc.policy.loc_tx;
      alloc = inc.alloc;
    }
  }
  RelayOutcome out;
  out.policy = BufferPolicy{BufferMode::WithBuffer, loc_rx, loc_tx, 0.0};
  out.alloc = alloc;
  out.r1 = r1;
  out.r2 = r2;
  out.r_total = df_rate(r1, r2);
  return out;
}

double little_delay(double r1, double r2, double queue_bits) {
  if (!(queue_bits >= 0.0)) throw Error(ErrorKind::InvalidArgument, "queue size must be >= 0");
  const double r = std::min(r1, r2);
  if (!(r > 0.0)) throw Error(ErrorKind::ZeroRate, "minimum link rate is zero; delay is unbounded");
  return queue_bits / r;
}

}  // namespace uavrelay
