#include "uavrelay/rates.hpp"

#include <cmath>
#include <numbers>

#include "uavrelay/error.hpp"

namespace uavrelay {

namespace {

double log2_det_hpd(const CMatrix& m) {
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::LLT<CMatrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "determinant argument is not positive definite");
  }
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / std::numbers::ln2;
}

}  // namespace

double rate_first_link(const HbfStages& st, double noise_mw) {
  if (!(noise_mw > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise power must be positive");
  const CMatrix comb = st.b_ur * st.f_ur;
  const CMatrix q1 = noise_mw * comb * comb.adjoint();
  const CMatrix a = st.b_ur * st.eff1 * st.b_b;
  const double r = log2_det_hpd(q1 + a * a.adjoint()) - log2_det_hpd(q1);
  return std::max(0.0, r);
}

std::vector<double> sinr_per_user(const HbfStages& st, const PowerAlloc& pa, double noise_mw) {
  const auto K = st.eff2.rows();
  if (static_cast<Eigen::Index>(pa.p.size()) != K) throw Error(ErrorKind::ShapeMismatch, "allocation length != K");
  // coupling(k, j) = |h_k^T F_ut b_j|^2
  const Eigen::MatrixXd coupling = (st.eff2 * st.b_ut).cwiseAbs2();
  std::vector<double> out(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (j != k) interference += pa.p[static_cast<std::size_t>(j)] * coupling(k, j);
    }
    out[static_cast<std::size_t>(k)] = pa.p[static_cast<std::size_t>(k)] * coupling(k, k) / (interference + noise_mw);
  }
  return out;
}

double rate_second_link(const HbfStages& st, const PowerAlloc& pa, double noise_mw) {
  double r = 0.0;
  for (double s : sinr_per_user(st, pa, noise_mw)) r += std::log2(1.0 + s);
  return r;
}

RateReport evaluate_rates(const HbfStages& st, const PowerAlloc& pa, double noise_mw) {
  RateReport rep;
  rep.r1 = rate_first_link(st, noise_mw);
  rep.sinr = sinr_per_user(st, pa, noise_mw);
  for (double s : rep.sinr) rep.r2 += std::log2(1.0 + s);
  rep.r_total = df_rate(rep.r1, rep.r2);
  return rep;
}

double kappa(const std::vector<double>& p_hat, const CMatrix& b_ut, double p_t_mw) {
  if (static_cast<Eigen::Index>(p_hat.size()) != b_ut.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "normalized allocation length != K");
  }
  double denom = 0.0;
  for (Eigen::Index k = 0; k < b_ut.cols(); ++k) {
    const double ph = p_hat[static_cast<std::size_t>(k)];
    if (ph < 0.0) throw Error(ErrorKind::InvalidArgument, "normalized powers must be >= 0");
    denom += ph * b_ut.col(k).squaredNorm();
  }
  if (!(denom > 0.0)) throw Error(ErrorKind::AllZeroAlloc, "allocation radiates no power");
  return std::sqrt(p_t_mw / denom);
}

double equal_power_eps(const CMatrix& b_ut, double p_t_mw) {
  const double total = b_ut.squaredNorm();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroPrecoder, "second-link precoder is zero");
  return std::sqrt(p_t_mw / total);
}

PowerAlloc scale_to_budget(const std::vector<double>& p_hat, const CMatrix& b_ut, double p_t_mw) {
  const double k = kappa(p_hat, b_ut, p_t_mw);
  PowerAlloc pa;
  for (double ph : p_hat) pa.p.push_back(k * k * ph);
  return pa;
}

PowerAlloc equal_power(const CMatrix& b_ut, double p_t_mw) {
  const double e = equal_power_eps(b_ut, p_t_mw);
  return PowerAlloc{std::vector<double>(static_cast<std::size_t>(b_ut.cols()), e * e)};
}

double radiated_power(const PowerAlloc& pa, const CMatrix& b_ut) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < b_ut.cols(); ++k) total += pa.p[static_cast<std::size_t>(k)] * b_ut.col(k).squaredNorm();
  return total;
}

}  // namespace uavrelay
