#include "uavrelay/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "uavrelay/error.hpp"

namespace uavrelay {

namespace {

constexpr double kCellTol = 1e-12;

double dist2(const QuantizedPair& p, Point2D c) {
  const double dx = p.lx - c.x;
  const double dy = p.ly - c.y;
  return dx * dx + dy * dy;
}

bool contains(const std::vector<QuantizedPair>& v, const QuantizedPair& p) {
  return std::find(v.begin(), v.end(), p) != v.end();
}

void sort_by_center(std::vector<QuantizedPair>& pairs, Point2D center) {
  std::sort(pairs.begin(), pairs.end(), [&](const QuantizedPair& a, const QuantizedPair& b) {
    return std::make_tuple(dist2(a, center), a.n, a.k) < std::make_tuple(dist2(b, center), b.n, b.k);
  });
}

void sort_lex(std::vector<QuantizedPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const QuantizedPair& a, const QuantizedPair& b) { return std::tie(a.n, a.k) < std::tie(b.n, b.k); });
}

// Cells whose closed interval [l - 1/N, l + 1/N] holds u. At most two.
template <class F>
void cells_holding(double u, int count, F&& visit) {
  const int guess = static_cast<int>(std::floor((u + 1.0) * count / 2.0)) + 1;
  for (int n = std::max(1, guess - 1); n <= std::min(count, guess + 1); ++n) {
    if (std::abs(u - grid_cosine(n, count)) <= 1.0 / count + kCellTol) visit(n);
  }
}

// Every grid pair met by the sampled support image, lexicographic order.
std::vector<QuantizedPair> raw_pairs(const AngularSupport& sup, int nx, int ny, int samples) {
  std::vector<char> hit(static_cast<std::size_t>(nx * ny), 0);
  const int se = sup.spread_elev > 0.0 ? samples : 1;
  const int sa = sup.spread_azim > 0.0 ? samples : 1;
  for (int i = 0; i < se; ++i) {
    const double t = se == 1 ? sup.mean_elev : sup.elev_lo() + (sup.elev_hi() - sup.elev_lo()) * i / (se - 1);
    for (int j = 0; j < sa; ++j) {
      const double p = sa == 1 ? sup.mean_azim : sup.azim_lo() + (sup.azim_hi() - sup.azim_lo()) * j / (sa - 1);
      const double u = std::sin(t) * std::cos(p);
      const double v = std::sin(t) * std::sin(p);
      cells_holding(u, nx, [&](int n) {
        cells_holding(v, ny, [&](int k) { hit[static_cast<std::size_t>((n - 1) * ny + (k - 1))] = 1; });
      });
    }
  }
  std::vector<QuantizedPair> out;
  for (int n = 1; n <= nx; ++n) {
    for (int k = 1; k <= ny; ++k) {
      if (hit[static_cast<std::size_t>((n - 1) * ny + (k - 1))]) out.push_back(make_pair_at(n, k, nx, ny));
    }
  }
  return out;
}

void trim(std::vector<QuantizedPair>& pairs, Point2D center, int budget) {
  if (static_cast<int>(pairs.size()) <= budget) return;
  sort_by_center(pairs, center);
  pairs.resize(static_cast<std::size_t>(budget));
  sort_lex(pairs);
}

}  // namespace

double grid_cosine(int index, int count) { return -1.0 + (2.0 * index - 1.0) / count; }

QuantizedPair make_pair_at(int n, int k, int nx, int ny) { return {n, k, grid_cosine(n, nx), grid_cosine(k, ny)}; }

Point2D support_center_image(const AngularSupport& sup) {
  const double s = std::sin(sup.mean_elev);
  return {s * std::cos(sup.mean_azim), s * std::sin(sup.mean_azim)};
}

std::vector<QuantizedPair> select_pairs(const AngularSupport& sup, int nx, int ny, int budget, int samples) {
  if (budget < 1) throw Error(ErrorKind::InvalidArgument, "pair budget must be >= 1");
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgument, "array factors must be >= 1");
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "support sampling needs >= 2 points per axis");
  sup.validate();
  auto pairs = raw_pairs(sup, nx, ny, samples);
  if (pairs.empty()) throw Error(ErrorKind::EmptySupport, "no grid cell meets the support image");
  trim(pairs, support_center_image(sup), budget);
  return pairs;
}

void pad_pairs(std::vector<QuantizedPair>& pairs, const AngularSupport& sup, int nx, int ny, int target,
               const std::vector<QuantizedPair>& excluded) {
  if (static_cast<int>(pairs.size()) >= target) return;
  std::vector<QuantizedPair> pool;
  for (int n = 1; n <= nx; ++n) {
    for (int k = 1; k <= ny; ++k) {
      auto p = make_pair_at(n, k, nx, ny);
      if (!contains(pairs, p) && !contains(excluded, p)) pool.push_back(p);
    }
  }
  sort_by_center(pool, support_center_image(sup));
  for (const auto& p : pool) {
    if (static_cast<int>(pairs.size()) >= target) break;
    pairs.push_back(p);
  }
  if (static_cast<int>(pairs.size()) < target) {
    throw Error(ErrorKind::InvalidArgument, "array has too few grid directions for the requested RF chains");
  }
}

CMatrix build_f_b(const std::vector<QuantizedPair>& pairs, int nx, int ny, double spacing) {
  if (pairs.empty()) throw Error(ErrorKind::InvalidArgument, "RF stage needs at least one pair");
  const UraShape shape{nx, ny};
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.size()));
  CMatrix f(shape.size(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    f.col(static_cast<Eigen::Index>(j)) =
        steering_from_cosines(pairs[j].lx, pairs[j].ly, shape, spacing, Direction::Transmit) * scale;
  }
  return f;
}

CMatrix build_f_ur(const std::vector<QuantizedPair>& pairs, int nx, int ny, double spacing) {
  // conj of the receive steering vector, i.e. the +j ramp laid out as rows
  return build_f_b(pairs, nx, ny, spacing).transpose();
}

GroupBeams build_f_ut(const std::vector<AngularSupport>& group_supports, const std::vector<int>& min_per_group,
                      const std::vector<int>& budget_per_group, int nx, int ny, double spacing, int samples,
                      bool strict) {
  const std::size_t G = group_supports.size();
  if (G == 0) throw Error(ErrorKind::InvalidArgument, "at least one group support required");
  if (min_per_group.size() != G || budget_per_group.size() != G) {
    throw Error(ErrorKind::ShapeMismatch, "per-group chain counts do not match the group count");
  }
  std::vector<std::vector<QuantizedPair>> raw(G);
  for (std::size_t g = 0; g < G; ++g) {
    group_supports[g].validate();
    raw[g] = raw_pairs(group_supports[g], nx, ny, samples);
    if (raw[g].empty()) throw Error(ErrorKind::EmptySupport, "group support misses every grid cell");
  }

  GroupBeams out;
  for (std::size_t g = 0; g < G && !out.overlapping; ++g) {
    for (std::size_t h = g + 1; h < G && !out.overlapping; ++h) {
      for (const auto& p : raw[g]) {
        if (contains(raw[h], p)) {
          out.overlapping = true;
          break;
        }
      }
    }
  }
  if (out.overlapping && strict) {
    throw Error(ErrorKind::OverlappingSupports, "group supports share grid cells");
  }

  std::vector<QuantizedPair> taken;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<QuantizedPair> mine;
    for (const auto& p : raw[g]) {
      if (!contains(taken, p)) mine.push_back(p);
    }
    trim(mine, support_center_image(group_supports[g]), budget_per_group[g]);

    std::vector<QuantizedPair> avoid = taken;
    for (std::size_t h = 0; h < G; ++h) {
      if (h == g) continue;
      avoid.insert(avoid.end(), raw[h].begin(), raw[h].end());
    }
    try {
      pad_pairs(mine, group_supports[g], nx, ny, min_per_group[g], avoid);
    } catch (const Error&) {
      pad_pairs(mine, group_supports[g], nx, ny, min_per_group[g], taken);
    }
    taken.insert(taken.end(), mine.begin(), mine.end());
    out.pairs.push_back(std::move(mine));
  }

  const int N = nx * ny;
  out.f_ut.resize(N, static_cast<Eigen::Index>(taken.size()));
  int col = 0;
  for (const auto& block : out.pairs) {
    out.offsets.push_back(col);
    const CMatrix f = build_f_b(block, nx, ny, spacing);
    out.f_ut.middleCols(col, f.cols()) = f;
    col += static_cast<int>(f.cols());
  }
  return out;
}

double group_leakage(const GroupBeams& beams, const std::vector<AngularSupport>& group_supports, UraShape shape,
                     double spacing, int samples) {
  const std::size_t G = group_supports.size();
  if (beams.pairs.size() != G) throw Error(ErrorKind::ShapeMismatch, "beam blocks do not match group supports");
  double worst = 0.0;
  for (std::size_t h = 0; h < G; ++h) {
    const auto& sup = group_supports[h];
    CMatrix a(samples * samples, shape.size());
    int r = 0;
    for (int i = 0; i < samples; ++i) {
      const double t = sup.elev_lo() + (sup.elev_hi() - sup.elev_lo()) * i / (samples - 1);
      for (int j = 0; j < samples; ++j, ++r) {
        const double p = sup.azim_lo() + (sup.azim_hi() - sup.azim_lo()) * j / (samples - 1);
        a.row(r) = array_response(t, p, shape, spacing).transpose();
      }
    }
    const double norm_a = a.norm();
    for (std::size_t g = 0; g < G; ++g) {
      if (g == h) continue;
      const auto width = static_cast<Eigen::Index>(beams.pairs[g].size());
      const double leak = (a * beams.f_ut.middleCols(beams.offsets[g], width)).norm() / norm_a;
      worst = std::max(worst, leak);
    }
  }
  return worst;
}

RfStages build_rf_stages(const Scenario& s, const LinkSupports& sup) {
  const int K = s.user_count();
  if (K > s.rf_budget) throw Error(ErrorKind::InvalidArgument, "rf_budget is smaller than the user count");
  RfStages rf;
  rf.tx_pairs = select_pairs(sup.first_tx, s.bs_array.rows, s.bs_array.cols, s.rf_budget, s.support_samples);
  pad_pairs(rf.tx_pairs, sup.first_tx, s.bs_array.rows, s.bs_array.cols, K);
  rf.rx_pairs = select_pairs(sup.first_rx, s.uav_rx_array.rows, s.uav_rx_array.cols, s.rf_budget, s.support_samples);
  pad_pairs(rf.rx_pairs, sup.first_rx, s.uav_rx_array.rows, s.uav_rx_array.cols, K);
  rf.f_b = build_f_b(rf.tx_pairs, s.bs_array.rows, s.bs_array.cols, s.element_spacing);
  rf.f_ur = build_f_ur(rf.rx_pairs, s.uav_rx_array.rows, s.uav_rx_array.cols, s.element_spacing);

  const int G = s.group_count();
  const int per_group = s.rf_budget / G;
  std::vector<int> budgets;
  for (int kg : s.group_sizes) budgets.push_back(std::max(kg, per_group));
  rf.ut = build_f_ut(sup.groups, s.group_sizes, budgets, s.uav_tx_array.rows, s.uav_tx_array.cols,
                     s.element_spacing, s.support_samples);
  return rf;
}

FirstLinkBaseband bb_first_link(const CMatrix& eff1, int users, double p_t_mw) {
  if (users < 1) throw Error(ErrorKind::InvalidArgument, "need at least one user");
  if (!(p_t_mw >= 0.0)) throw Error(ErrorKind::InvalidArgument, "transmit power must be >= 0");
  if (std::min(eff1.rows(), eff1.cols()) < users) {
    throw Error(ErrorKind::RankDeficient, "effective first-link channel has fewer RF chains than users");
  }
  Eigen::JacobiSVD<CMatrix> svd(eff1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol =
      static_cast<double>(std::max(eff1.rows(), eff1.cols())) * std::numeric_limits<double>::epsilon() * sv(0);
  if (!(sv(0) > 0.0) || !(sv(users - 1) > tol)) {
    throw Error(ErrorKind::RankDeficient, "effective first-link channel rank is below the user count");
  }
  FirstLinkBaseband out;
  out.b_b = std::sqrt(p_t_mw / users) * svd.matrixV().leftCols(users);
  out.b_ur = svd.matrixU().leftCols(users).adjoint();
  out.singular_values = sv;
  return out;
}

CMatrix bb_second_link(const CMatrix& eff2, double beta) {
  if (!(beta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "regularizer must be >= 0");
  const auto n = eff2.cols();
  if (n < eff2.rows()) throw Error(ErrorKind::InvalidArgument, "second link needs N_RFu >= K");
  const CMatrix gram = eff2.adjoint() * eff2;
  const CMatrix rhs = eff2.adjoint();
  if (beta > 0.0) {
    const CMatrix m = gram + CMatrix::Identity(n, n) * (beta * static_cast<double>(n));
    return m.ldlt().solve(rhs);
  }
  Eigen::FullPivLU<CMatrix> lu(gram);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularSystem, "unregularized second-link system is singular");
  return lu.solve(rhs);
}

HbfStages complete_stages(const RfStages& rf, const ChannelPair& ch, int users, double p_t_mw, double noise_mw) {
  if (!(p_t_mw > 0.0)) throw Error(ErrorKind::InvalidArgument, "transmit power must be positive");
  HbfStages st;
  st.f_b = rf.f_b;
  st.f_ur = rf.f_ur;
  st.f_ut = rf.ut.f_ut;
  st.eff1 = rf.f_ur * ch.h1 * rf.f_b;
  auto bb = bb_first_link(st.eff1, users, p_t_mw);
  st.b_b = std::move(bb.b_b);
  st.b_ur = std::move(bb.b_ur);
  st.singular_values = std::move(bb.singular_values);
  st.eff2 = ch.h2 * rf.ut.f_ut;
  st.b_ut = bb_second_link(st.eff2, noise_mw / p_t_mw);
  return st;
}

}  // namespace uavrelay
