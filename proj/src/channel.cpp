#include "uavrelay/channel.hpp"

#include <cmath>
#include <numbers>

#include "uavrelay/error.hpp"
#include "uavrelay/json_io.hpp"

namespace uavrelay {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CVector phase_ramp(int n, double cosine, double spacing, double sign) {
  CVector out(n);
  for (int i = 0; i < n; ++i) out(i) = std::polar(1.0, sign * kTwoPi * spacing * i * cosine);
  return out;
}

PathSet make_path_set(const AngularSupport& sup, const std::vector<double>& elev_off,
                      const std::vector<double>& azim_off, const std::vector<cdouble>& gain, double tau) {
  PathSet p;
  const auto n = gain.size();
  p.elev.resize(n);
  p.azim.resize(n);
  p.gain = gain;
  p.distance.assign(n, tau);
  for (std::size_t l = 0; l < n; ++l) {
    p.elev[l] = sup.mean_elev + elev_off[l] * sup.spread_elev;
    p.azim[l] = sup.mean_azim + azim_off[l] * sup.spread_azim;
  }
  return p;
}

// Polar angle from the vertical and azimuth of the direction a -> b.
AngularSupport recentered(const AngularSupport& base, const Position3D& a, const Position3D& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double horizontal = std::hypot(dx, dy);
  AngularSupport out = base;
  out.mean_elev = std::atan2(horizontal, std::abs(b.z - a.z));
  double az = horizontal > 0.0 ? std::atan2(dy, dx) : 0.0;
  if (az < 0.0) az += kTwoPi;
  out.mean_azim = az;
  return out;
}

}  // namespace

CVector steering_from_cosines(double u, double v, UraShape shape, double spacing, Direction dir) {
  const double sign = dir == Direction::Transmit ? 1.0 : -1.0;
  const CVector xr = phase_ramp(shape.rows, u, spacing, sign);
  const CVector yr = phase_ramp(shape.cols, v, spacing, sign);
  CVector out(shape.size());
  for (int ix = 0; ix < shape.rows; ++ix) {
    for (int iy = 0; iy < shape.cols; ++iy) out(ix * shape.cols + iy) = xr(ix) * yr(iy);
  }
  return out;
}

CVector steering_vector(double elev, double azim, UraShape shape, double spacing, Direction dir) {
  const double s = std::sin(elev);
  return steering_from_cosines(s * std::cos(azim), s * std::sin(azim), shape, spacing, dir);
}

double pathloss_amplitude(const Scenario& s, double tau) {
  const double loss_db = s.ref_pathloss_db + 10.0 * s.pathloss_exp * std::log10(tau);
  return std::pow(10.0, -loss_db / 20.0);
}

FirstLinkFading draw_first_link_fading(int paths, Rng& rng) {
  if (paths < 1) throw Error(ErrorKind::InvalidArgument, "first link needs L >= 1 paths");
  FirstLinkFading f;
  const double var = 1.0 / paths;
  for (int l = 0; l < paths; ++l) {
    f.tx_elev.push_back(uniform(rng, -1.0, 1.0));
    f.tx_azim.push_back(uniform(rng, -1.0, 1.0));
    f.rx_elev.push_back(uniform(rng, -1.0, 1.0));
    f.rx_azim.push_back(uniform(rng, -1.0, 1.0));
    f.gain.push_back(complex_normal(rng, var));
  }
  return f;
}

UserFading draw_user_fading(int paths, Rng& rng) {
  if (paths < 1) throw Error(ErrorKind::InvalidArgument, "second link needs Q >= 1 paths");
  UserFading f;
  const double var = 1.0 / paths;
  for (int q = 0; q < paths; ++q) {
    f.elev.push_back(uniform(rng, -1.0, 1.0));
    f.azim.push_back(uniform(rng, -1.0, 1.0));
    f.gain.push_back(complex_normal(rng, var));
  }
  return f;
}

FirstLink synthesize_first_link(const Scenario& s, const AngularSupport& tx, const AngularSupport& rx,
                                const FirstLinkFading& fading, Point2D uav_xy, ChannelOptions opts) {
  const double tau = distances(s, uav_xy).bs_uav;
  const double amp = opts.apply_pathloss ? pathloss_amplitude(s, tau) : 1.0;

  FirstLink out;
  out.tx_paths = make_path_set(tx, fading.tx_elev, fading.tx_azim, fading.gain, tau);
  out.rx_paths = make_path_set(rx, fading.rx_elev, fading.rx_azim, fading.gain, tau);

  const int L = static_cast<int>(fading.gain.size());
  CMatrix a_rx(s.uav_rx_array.size(), L);
  CMatrix a_tx(L, s.bs_array.size());
  for (int l = 0; l < L; ++l) {
    a_rx.col(l) = array_response(out.rx_paths.elev[l], out.rx_paths.azim[l], s.uav_rx_array, s.element_spacing);
    a_tx.row(l) =
        array_response(out.tx_paths.elev[l], out.tx_paths.azim[l], s.bs_array, s.element_spacing).transpose();
  }
  CVector z(L);
  for (int l = 0; l < L; ++l) z(l) = fading.gain[static_cast<std::size_t>(l)] * amp;
  out.h1 = a_rx * z.asDiagonal() * a_tx;
  return out;
}

SecondLink synthesize_second_link(const Scenario& s, const std::vector<AngularSupport>& group_supports,
                                  const std::vector<UserFading>& fading, Point2D uav_xy, ChannelOptions opts) {
  const auto groups = s.user_groups();
  const int K = s.user_count();
  if (static_cast<int>(fading.size()) != K || static_cast<int>(s.users.size()) != K) {
    throw Error(ErrorKind::ShapeMismatch, "second link fading/users do not match K");
  }
  if (group_supports.size() != static_cast<std::size_t>(s.group_count())) {
    throw Error(ErrorKind::ShapeMismatch, "one angular support per group required");
  }
  const auto dist = distances(s, uav_xy);
  const int nt = s.uav_tx_array.size();

  SecondLink out;
  out.h2 = CMatrix::Zero(K, nt);
  for (int k = 0; k < K; ++k) {
    const auto& sup = group_supports[static_cast<std::size_t>(groups[static_cast<std::size_t>(k)])];
    const auto& f = fading[static_cast<std::size_t>(k)];
    const double tau = dist.uav_user[static_cast<std::size_t>(k)];
    const double amp = opts.apply_pathloss ? pathloss_amplitude(s, tau) : 1.0;
    PathSet p = make_path_set(sup, f.elev, f.azim, f.gain, tau);
    for (int q = 0; q < p.count(); ++q) {
      out.h2.row(k) += (p.gain[static_cast<std::size_t>(q)] * amp) *
                       array_response(p.elev[q], p.azim[q], s.uav_tx_array, s.element_spacing).transpose();
    }
    out.user_paths.push_back(std::move(p));
  }
  return out;
}

FirstLink draw_first_link(const Scenario& s, const AngularSupport& tx, const AngularSupport& rx, Point2D uav_xy,
                          Rng& rng, ChannelOptions opts) {
  tx.validate();
  rx.validate();
  const auto fading = draw_first_link_fading(s.first_link_paths, rng);
  return synthesize_first_link(s, tx, rx, fading, uav_xy, opts);
}

SecondLink draw_second_link(const Scenario& s, const std::vector<AngularSupport>& group_supports, Point2D uav_xy,
                            Rng& rng, ChannelOptions opts) {
  std::vector<UserFading> fading;
  for (int k = 0; k < s.user_count(); ++k) fading.push_back(draw_user_fading(s.second_link_paths, rng));
  return synthesize_second_link(s, group_supports, fading, uav_xy, opts);
}

LinkSupports supports_at(const Scenario& s, Point2D uav_xy) {
  LinkSupports out{s.first_tx_support, s.first_rx_support, s.group_supports};
  if (s.angle_model == AngleModel::Fixed) return out;

  const Position3D uav{uav_xy.x, uav_xy.y, s.uav.z};
  out.first_tx = recentered(s.first_tx_support, s.bs, uav);
  out.first_rx = recentered(s.first_rx_support, uav, s.bs);
  const auto groups = s.user_groups();
  for (int g = 0; g < s.group_count(); ++g) {
    Position3D centroid{};
    int n = 0;
    for (std::size_t k = 0; k < s.users.size(); ++k) {
      if (groups[k] != g) continue;
      centroid.x += s.users[k].x;
      centroid.y += s.users[k].y;
      centroid.z += s.users[k].z;
      ++n;
    }
    if (n == 0) continue;
    centroid.x /= n;
    centroid.y /= n;
    centroid.z /= n;
    out.groups[static_cast<std::size_t>(g)] = recentered(s.group_supports[static_cast<std::size_t>(g)], uav, centroid);
  }
  return out;
}

ChannelRealization::ChannelRealization(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)), seed_(seed) {
  Rng rng(seed);
  if (scenario_.randomize_users) scenario_.users = draw_users(scenario_.user_count(), scenario_.user_region, rng);
  first_ = draw_first_link_fading(scenario_.first_link_paths, rng);
  for (int k = 0; k < scenario_.user_count(); ++k) users_.push_back(draw_user_fading(scenario_.second_link_paths, rng));
}

ChannelPair ChannelRealization::channels_at(Point2D uav_xy, ChannelOptions opts) const {
  const auto sup = supports(uav_xy);
  auto first = synthesize_first_link(scenario_, sup.first_tx, sup.first_rx, first_, uav_xy, opts);
  auto second = synthesize_second_link(scenario_, sup.groups, users_, uav_xy, opts);
  return ChannelPair{std::move(first.h1), std::move(second.h2), std::move(first.tx_paths), std::move(first.rx_paths),
                     std::move(second.user_paths)};
}

namespace {

io::json paths_to_json(const PathSet& p) {
  std::vector<double> re, im;
  for (const auto& g : p.gain) {
    re.push_back(g.real());
    im.push_back(g.imag());
  }
  return io::json{{"elev", p.elev}, {"azim", p.azim}, {"gain_re", re}, {"gain_im", im}, {"distance", p.distance}};
}

PathSet paths_from_json(const io::json& j) {
  PathSet p;
  p.elev = j.at("elev").get<std::vector<double>>();
  p.azim = j.at("azim").get<std::vector<double>>();
  p.distance = j.at("distance").get<std::vector<double>>();
  const auto re = j.at("gain_re").get<std::vector<double>>();
  const auto im = j.at("gain_im").get<std::vector<double>>();
  for (std::size_t i = 0; i < re.size(); ++i) p.gain.emplace_back(re[i], im.at(i));
  return p;
}

}  // namespace

std::string channel_to_json(const ChannelPair& ch, std::uint64_t seed) {
  io::json users = io::json::array();
  for (const auto& p : ch.user_paths) users.push_back(paths_to_json(p));
  io::json j{{"seed", seed},
             {"h1", io::complex_to_json(ch.h1)},
             {"h2", io::complex_to_json(ch.h2)},
             {"tx_paths", paths_to_json(ch.tx_paths)},
             {"rx_paths", paths_to_json(ch.rx_paths)},
             {"user_paths", users}};
  return j.dump();
}

ChannelPair channel_from_json(const std::string& text, std::uint64_t* seed) {
  const auto j = io::json::parse(text);
  ChannelPair ch;
  ch.h1 = io::complex_from_json(j.at("h1"));
  ch.h2 = io::complex_from_json(j.at("h2"));
  ch.tx_paths = paths_from_json(j.at("tx_paths"));
  ch.rx_paths = paths_from_json(j.at("rx_paths"));
  for (const auto& u : j.at("user_paths")) ch.user_paths.push_back(paths_from_json(u));
  if (seed != nullptr) *seed = j.at("seed").get<std::uint64_t>();
  return ch;
}

}  // namespace uavrelay
