#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "uavrelay/channel.hpp"
#include "uavrelay/error.hpp"
#include "uavrelay/units.hpp"

using namespace uavrelay;
using std::numbers::pi;

namespace {

Scenario one_user_scenario(Position3D user) {
  Scenario s = Scenario::desk();
  s.randomize_users = false;
  s.group_sizes = {1};
  s.group_supports = make_group_supports(1);
  s.users = {user};
  return s;
}

}  // namespace

TEST_CASE("steering vector: broadside and the two-element example") {
  const CVector a = steering_vector(0.0, 1.234, {2, 2}, 0.5, Direction::Receive);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(a(i) - cdouble(1.0, 0.0)) < 1e-15);

  const CVector r = steering_vector(pi / 2, 0.0, {2, 1}, 0.5, Direction::Receive);
  CHECK(std::abs(r(0) - cdouble(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(r(1) - cdouble(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering vector: Kronecker structure, unit modulus, sign flip") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const double th = uniform(rng, 0.0, pi);
    const double ph = uniform(rng, 0.0, 2 * pi);
    const UraShape shape{3, 5};
    const double d = 0.5;
    const CVector a = steering_vector(th, ph, shape, d, Direction::Receive);
    const CVector b = steering_vector(th, ph, shape, d, Direction::Transmit);
    REQUIRE(a.size() == 15);
    for (int ix = 0; ix < 3; ++ix) {
      for (int iy = 0; iy < 5; ++iy) {
        const cdouble xr = std::polar(1.0, -2 * pi * d * ix * std::sin(th) * std::cos(ph));
        const cdouble yr = std::polar(1.0, -2 * pi * d * iy * std::sin(th) * std::sin(ph));
        CHECK(std::abs(a(ix * 5 + iy) - xr * yr) < 1e-12);
        CHECK(std::abs(b(ix * 5 + iy) - std::conj(xr * yr)) < 1e-12);
        CHECK(std::abs(a(ix * 5 + iy)) == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("first link: single path is an outer product") {
  Scenario s = one_user_scenario({60.0, 60.0, 0.0});
  s.first_tx_support.spread_elev = s.first_tx_support.spread_azim = 0.0;
  FirstLinkFading f{{0.0}, {0.0}, {0.0}, {0.0}, {cdouble(1.0, 0.0)}};
  const auto link = synthesize_first_link(s, s.first_tx_support, s.first_rx_support, f, {50, 50}, {false});
  const CVector ar = array_response(s.first_rx_support.mean_elev, s.first_rx_support.mean_azim, s.uav_rx_array, 0.5);
  const CVector at = array_response(s.first_tx_support.mean_elev, s.first_tx_support.mean_azim, s.bs_array, 0.5);
  CHECK((link.h1 - ar * at.transpose()).norm() < 1e-12);
  Eigen::JacobiSVD<CMatrix> svd(link.h1);
  CHECK(svd.singularValues()(1) < 1e-9 * svd.singularValues()(0));
}

TEST_CASE("first link: mean power matches the path-loss budget") {
  Scenario s = one_user_scenario({60.0, 60.0, 0.0});
  Rng rng(5);
  const int draws = 10000;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) {
    acc += draw_first_link(s, s.first_tx_support, s.first_rx_support, {50, 50}, rng).h1.squaredNorm();
  }
  const double tau = distances(s, {50, 50}).bs_uav;
  const double amp = pathloss_amplitude(s, tau);
  const double expected = s.uav_rx_array.size() * s.bs_array.size() * amp * amp;
  CHECK(acc / draws == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("first link: path angles stay inside supports, draws are reproducible") {
  Scenario s = one_user_scenario({60.0, 60.0, 0.0});
  Rng a(77), b(77);
  const auto la = draw_first_link(s, s.first_tx_support, s.first_rx_support, {40, 30}, a);
  const auto lb = draw_first_link(s, s.first_tx_support, s.first_rx_support, {40, 30}, b);
  CHECK(la.h1 == lb.h1);
  CHECK(la.tx_paths.count() == s.first_link_paths);
  for (int l = 0; l < la.tx_paths.count(); ++l) {
    CHECK(la.tx_paths.elev[l] >= s.first_tx_support.elev_lo() - 1e-15);
    CHECK(la.tx_paths.elev[l] <= s.first_tx_support.elev_hi() + 1e-15);
    CHECK(la.rx_paths.azim[l] >= s.first_rx_support.azim_lo() - 1e-15);
    CHECK(la.rx_paths.azim[l] <= s.first_rx_support.azim_hi() + 1e-15);
  }
}

TEST_CASE("second link: single path row and distance scaling") {
  Scenario s = one_user_scenario({50.0, 50.0, 0.0});
  s.group_supports[0].spread_elev = s.group_supports[0].spread_azim = 0.0;
  std::vector<UserFading> fading{{{0.0}, {0.0}, {cdouble(1.0, 0.0)}}};
  const auto raw = synthesize_second_link(s, s.group_supports, fading, {50, 50}, {false});
  const CVector a = array_response(s.group_supports[0].mean_elev, s.group_supports[0].mean_azim, s.uav_tx_array, 0.5);
  CHECK((raw.h2.row(0).transpose() - a).norm() < 1e-12);
  for (int i = 0; i < raw.h2.cols(); ++i) CHECK(std::abs(raw.h2(0, i)) == doctest::Approx(1.0));

  // user straight below: tau = 20; then a user whose slant range is 40
  const auto near = synthesize_second_link(s, s.group_supports, fading, {50, 50});
  Scenario far = s;
  far.users[0] = {50.0 + std::sqrt(1200.0), 50.0, 0.0};
  far.box.x_max = 200.0;
  const auto farl = synthesize_second_link(far, far.group_supports, fading, {50, 50});
  const double ratio = farl.h2.norm() / near.h2.norm();
  CHECK(ratio == doctest::Approx(std::pow(2.0, -s.pathloss_exp / 2.0)).epsilon(1e-12));
  CHECK(ratio < 1.0);
}

TEST_CASE("second link: groups use their own supports") {
  Scenario s = Scenario::desk();
  const ChannelRealization ch(s, 9);
  const auto pair = ch.channels_at({50, 50});
  const auto groups = s.user_groups();
  REQUIRE(pair.user_paths.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& sup = s.group_supports[static_cast<std::size_t>(groups[k])];
    for (double az : pair.user_paths[k].azim) {
      CHECK(az >= sup.azim_lo() - 1e-15);
      CHECK(az <= sup.azim_hi() + 1e-15);
    }
  }
  CHECK(rad_to_deg(s.group_supports[1].mean_azim - s.group_supports[0].mean_azim) == doctest::Approx(120.0));
}

TEST_CASE("realization: gains fixed, norm falls with distance") {
  Scenario s = Scenario::desk();
  const ChannelRealization ch(s, 4);
  double last = ch.channels_at({5, 5}).h1.norm();
  for (double x : {20.0, 40.0, 70.0, 100.0}) {
    const double n = ch.channels_at({x, x}).h1.norm();
    CHECK(n < last);
    last = n;
  }
}

TEST_CASE("realization: JSON round trip") {
  const ChannelRealization ch(Scenario::desk(), 21);
  const auto pair = ch.channels_at({30, 70});
  std::uint64_t seed = 0;
  const auto back = channel_from_json(channel_to_json(pair, 21), &seed);
  CHECK(seed == 21);
  CHECK((back.h1 - pair.h1).norm() == 0.0);
  CHECK((back.h2 - pair.h2).norm() == 0.0);
  CHECK(back.user_paths.size() == pair.user_paths.size());
}

TEST_CASE("geometric angle model recenters on the line of sight") {
  Scenario s = Scenario::desk();
  s.angle_model = AngleModel::Geometric;
  const ChannelRealization ch(s, 2);
  const auto a = ch.supports({20, 20});
  const auto b = ch.supports({90, 10});
  CHECK(a.first_tx.mean_azim != doctest::Approx(b.first_tx.mean_azim));
  CHECK(rad_to_deg(a.first_tx.mean_azim) == doctest::Approx(45.0));
}
