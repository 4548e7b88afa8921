#pragma once

#include <algorithm>
#include <vector>

#include "uavrelay/beamforming.hpp"

namespace uavrelay {

/// Per-user transmit powers in mW; the precoder weight of user k is sqrt(p[k]).
struct PowerAlloc {
  std::vector<double> p;
};

struct RateReport {
  double r1 = 0.0;  // bps/Hz
  double r2 = 0.0;
  double r_total = 0.0;
  std::vector<double> sinr;
};

double rate_first_link(const HbfStages& st, double noise_mw);

std::vector<double> sinr_per_user(const HbfStages& st, const PowerAlloc& pa, double noise_mw);
double rate_second_link(const HbfStages& st, const PowerAlloc& pa, double noise_mw);

/// Half-duplex decode-and-forward rate.
inline double df_rate(double r1, double r2) { return 0.5 * std::min(r1, r2); }

RateReport evaluate_rates(const HbfStages& st, const PowerAlloc& pa, double noise_mw);

/// Scale mapping normalized powers onto the budget: sqrt(P_T / sum p_hat_k ||b_k||^2).
double kappa(const std::vector<double>& p_hat, const CMatrix& b_ut, double p_t_mw);

/// Equal-power amplitude: sqrt(P_T / sum ||b_k||^2).
double equal_power_eps(const CMatrix& b_ut, double p_t_mw);

/// p_k = kappa^2 p_hat_k, so that sum p_k ||b_k||^2 = P_T.
PowerAlloc scale_to_budget(const std::vector<double>& p_hat, const CMatrix& b_ut, double p_t_mw);
PowerAlloc equal_power(const CMatrix& b_ut, double p_t_mw);

/// Transmit power sum p_k ||b_k||^2 of an allocation.
double radiated_power(const PowerAlloc& pa, const CMatrix& b_ut);

}  // namespace uavrelay
