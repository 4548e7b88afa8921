#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "uavrelay/error.hpp"
#include "uavrelay/rates.hpp"
#include "uavrelay/system.hpp"

using namespace uavrelay;

namespace {

// Stages with random effective channels; only the fields the rates read.
HbfStages random_stages(int K, int n_rfb, int n_rfu, int n_r, int n_t, Rng& rng, double p_t = 1.0) {
  HbfStages st;
  std::vector<QuantizedPair> rx, tx;
  for (int i = 0; i < n_rfu; ++i) rx.push_back(make_pair_at(1 + i % 4, 1 + i / 4, 4, n_r / 4));
  for (int i = 0; i < n_rfu; ++i) tx.push_back(make_pair_at(1 + i % 4, 1 + i / 4, 4, n_t / 4));
  st.f_ur = build_f_ur(rx, 4, n_r / 4);
  st.f_ut = build_f_b(tx, 4, n_t / 4);
  st.eff1 = testing::random_cmatrix(n_rfu, n_rfb, rng);
  const auto bb = bb_first_link(st.eff1, K, p_t);
  st.b_b = bb.b_b;
  st.b_ur = bb.b_ur;
  const CMatrix h2 = testing::random_cmatrix(K, n_t, rng);
  st.eff2 = h2 * st.f_ut;
  st.b_ut = bb_second_link(st.eff2, 0.05);
  return st;
}

std::vector<double> oracle_sinr(const HbfStages& st, const std::vector<int>& group, const std::vector<double>& p,
                                double noise) {
  const int K = static_cast<int>(p.size());
  std::vector<double> out;
  for (int k = 0; k < K; ++k) {
    double signal = 0.0, intra = 0.0, inter = 0.0;
    for (int j = 0; j < K; ++j) {
      cdouble acc = 0.0;
      for (Eigen::Index r = 0; r < st.eff2.cols(); ++r) acc += st.eff2(k, r) * st.b_ut(r, j);
      const double c = std::norm(acc) * p[static_cast<std::size_t>(j)];
      if (j == k)
        signal = c;
      else if (group[static_cast<std::size_t>(j)] == group[static_cast<std::size_t>(k)])
        intra += c;
      else
        inter += c;
    }
    out.push_back(signal / (intra + inter + noise));
  }
  return out;
}

}  // namespace

TEST_CASE("first link: zero precoder gives zero rate") {
  Rng rng(1);
  auto st = random_stages(2, 4, 4, 16, 16, rng);
  st.b_b.setZero();
  CHECK(rate_first_link(st, 1e-3) == doctest::Approx(0.0));
}

TEST_CASE("first link: single-user scalar reduction") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const double pt = 0.1 + t;
    const double noise = 0.05;
    const auto st = random_stages(1, 3, 4, 16, 16, rng, pt);
    const cdouble chain = (st.b_ur * st.eff1 * st.b_b)(0, 0);
    const double comb = (st.b_ur * st.f_ur).squaredNorm();
    const double expect = std::log2(1.0 + std::norm(chain) / (noise * comb));
    CHECK(rate_first_link(st, noise) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("first link: more power never lowers the rate") {
  Rng rng(3);
  auto st = random_stages(3, 5, 6, 16, 16, rng);
  double last = rate_first_link(st, 0.1);
  for (int i = 0; i < 10; ++i) {
    st.b_b *= std::sqrt(2.0);
    const double r = rate_first_link(st, 0.1);
    CHECK(r >= last);
    last = r;
  }
}

TEST_CASE("first link: broken combiner is a numerical failure") {
  Rng rng(4);
  auto st = random_stages(2, 4, 4, 16, 16, rng);
  st.b_ur.setZero();
  try {
    rate_first_link(st, 1.0);
    FAIL("expected NumericalFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericalFailure);
  }
}

TEST_CASE("second link: single user has no interference") {
  Rng rng(5);
  const auto st = random_stages(1, 2, 3, 16, 16, rng);
  const double g = std::norm((st.eff2 * st.b_ut)(0, 0));
  const auto s = sinr_per_user(st, PowerAlloc{{2.5}}, 0.3);
  CHECK(s[0] == doctest::Approx(2.5 * g / 0.3).epsilon(1e-12));
  CHECK(sinr_per_user(st, PowerAlloc{{0.0}}, 0.3)[0] == 0.0);
}

TEST_CASE("second link: coupling-matrix oracle") {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const int K = 3;
    const auto st = random_stages(K, 4, 6, 16, 16, rng);
    std::vector<double> p;
    for (int k = 0; k < K; ++k) p.push_back(uniform(rng, 0.0, 3.0));
    const std::vector<int> group{0, 0, 1};
    const auto got = sinr_per_user(st, PowerAlloc{p}, 0.2);
    const auto want = oracle_sinr(st, group, p, 0.2);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      CHECK(testing::rel_err(got[k], want[k]) < 1e-10);
      sum += std::log2(1.0 + want[k]);
    }
    CHECK(testing::rel_err(rate_second_link(st, PowerAlloc{p}, 0.2), sum) < 1e-10);
  }
}

TEST_CASE("second link: all SINR one gives one bit per user") {
  // diagonal unit coupling, unit power, unit noise
  HbfStages st;
  st.eff2 = CMatrix::Identity(4, 4);
  st.b_ut = CMatrix::Identity(4, 4);
  CHECK(rate_second_link(st, PowerAlloc{{1, 1, 1, 1}}, 1.0) == doctest::Approx(4.0));
  CHECK(rate_second_link(st, PowerAlloc{{0, 0, 0, 0}}, 1.0) == 0.0);
}

TEST_CASE("second link: more power elsewhere never helps a user") {
  Rng rng(7);
  const auto st = random_stages(4, 4, 6, 16, 16, rng);
  std::vector<double> p{1.0, 1.0, 1.0, 1.0};
  const auto base = sinr_per_user(st, PowerAlloc{p}, 0.1);
  p[2] = 5.0;
  const auto more = sinr_per_user(st, PowerAlloc{p}, 0.1);
  for (int k : {0, 1, 3}) CHECK(more[k] <= base[k]);
}

TEST_CASE("rates are invariant to a common power unit") {
  Rng rng(8);
  auto st = random_stages(3, 4, 5, 16, 16, rng);
  const PowerAlloc pa{{0.4, 1.0, 2.0}};
  const auto a = evaluate_rates(st, pa, 0.07);
  const double c = 1000.0;
  st.b_b *= std::sqrt(c);
  PowerAlloc scaled = pa;
  for (auto& v : scaled.p) v *= c;
  const auto b = evaluate_rates(st, scaled, 0.07 * c);
  CHECK(b.r1 == doctest::Approx(a.r1).epsilon(1e-10));
  CHECK(b.r2 == doctest::Approx(a.r2).epsilon(1e-10));
  CHECK(a.r_total == 0.5 * std::min(a.r1, a.r2));
}

TEST_CASE("kappa") {
  CMatrix b = CMatrix::Zero(2, 1);
  b(0, 0) = 1.0;
  CHECK(kappa({1.0}, b, 9.0) == doctest::Approx(3.0));

  Rng rng(9);
  const CMatrix bb = testing::random_cmatrix(5, 3, rng);
  const std::vector<double> ph{0.2, 1.0, 0.6};
  CHECK(kappa(ph, 2.0 * bb, 4.0) == doctest::Approx(0.5 * kappa(ph, bb, 4.0)).epsilon(1e-14));
  CHECK(radiated_power(scale_to_budget(ph, bb, 4.0), bb) == doctest::Approx(4.0).epsilon(1e-9));

  try {
    kappa({0.0, 0.0, 0.0}, bb, 1.0);
    FAIL("expected AllZeroAlloc");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AllZeroAlloc);
  }
}

TEST_CASE("equal power") {
  const CMatrix eye = CMatrix::Identity(4, 4);
  CHECK(equal_power_eps(eye, 8.0) == doctest::Approx(std::sqrt(2.0)));

  Rng rng(10);
  const CMatrix b = testing::random_cmatrix(6, 4, rng);
  CHECK(radiated_power(equal_power(b, 3.0), b) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(equal_power_eps(b, 3.0) - kappa({1, 1, 1, 1}, b, 3.0)) < 1e-12);
  try {
    equal_power_eps(CMatrix::Zero(4, 2), 1.0);
    FAIL("expected ZeroPrecoder");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroPrecoder);
  }
}
