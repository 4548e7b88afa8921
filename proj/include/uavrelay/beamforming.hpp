#pragma once

#include <vector>

#include "uavrelay/channel.hpp"
#include "uavrelay/geometry.hpp"

namespace uavrelay {

/// Grid direction cosines lx = -1 + (2n - 1) / N_x, ly = -1 + (2k - 1) / N_y, n and k 1-based.
struct QuantizedPair {
  int n = 1;
  int k = 1;
  double lx = 0.0;
  double ly = 0.0;

  bool operator==(const QuantizedPair& o) const { return n == o.n && k == o.k; }
};

double grid_cosine(int index, int count);
QuantizedPair make_pair_at(int n, int k, int nx, int ny);

/// Direction-cosine image (sin t cos p, sin t sin p) of a support's center.
Point2D support_center_image(const AngularSupport& sup);

/// Grid pairs whose closed cells meet the sampled (u, v) image of `sup`,
/// trimmed to `budget` by distance to the center image, then (n, k).
std::vector<QuantizedPair> select_pairs(const AngularSupport& sup, int nx, int ny, int budget,
                                        int samples = 200);

/// Appends the grid pairs nearest the support center that are neither in
/// `pairs` nor in `excluded` until `pairs` holds `target` entries.
void pad_pairs(std::vector<QuantizedPair>& pairs, const AngularSupport& sup, int nx, int ny, int target,
               const std::vector<QuantizedPair>& excluded = {});

/// Columns are normalized transmit steering vectors at the pairs (N x pairs).
CMatrix build_f_b(const std::vector<QuantizedPair>& pairs, int nx, int ny, double spacing = 0.5);

/// Rows are matched receive combiners at the pairs (pairs x N).
CMatrix build_f_ur(const std::vector<QuantizedPair>& pairs, int nx, int ny, double spacing = 0.5);

struct GroupBeams {
  CMatrix f_ut;                                     // N_t x sum of block widths
  std::vector<std::vector<QuantizedPair>> pairs;  // per group
  std::vector<int> offsets;                         // first column of each block
  bool overlapping = false;                         // raw group cell sets shared a pair
};

/// Per-group column blocks of the UAV transmit RF stage. Group g receives at
/// least `min_per_group[g]` columns and at most `budget_per_group[g]`; pairs
/// are never shared between groups. With `strict`, overlapping supports throw.
GroupBeams build_f_ut(const std::vector<AngularSupport>& group_supports, const std::vector<int>& min_per_group,
                      const std::vector<int>& budget_per_group, int nx, int ny, double spacing = 0.5,
                      int samples = 200, bool strict = false);

/// Worst cross-group leakage ||A_h F_g||_F / ||A_h||_F over g != h, where the
/// rows of A_h are array responses sampled across support h.
double group_leakage(const GroupBeams& beams, const std::vector<AngularSupport>& group_supports, UraShape shape,
                     double spacing = 0.5, int samples = 24);

struct RfStages {
  CMatrix f_b;   // N_T x N_RFb
  CMatrix f_ur;  // N_RFu,r x N_r
  GroupBeams ut;
  std::vector<QuantizedPair> tx_pairs;
  std::vector<QuantizedPair> rx_pairs;
};

/// RF stages from the angular supports alone. Each stage gets at least K
/// chains and at most `s.rf_budget`.
RfStages build_rf_stages(const Scenario& s, const LinkSupports& sup);

struct HbfStages {
  CMatrix f_b;
  CMatrix b_b;   // N_RFb x K
  CMatrix f_ur;
  CMatrix b_ur;  // K x N_RFu,r
  CMatrix f_ut;
  CMatrix b_ut;  // N_RFu,t x K
  CMatrix eff1;  // F_ur H1 F_b
  CMatrix eff2;  // H2 F_ut
  Eigen::VectorXd singular_values;  // of eff1, decreasing
};

struct FirstLinkBaseband {
  CMatrix b_b;
  CMatrix b_ur;
  Eigen::VectorXd singular_values;
};

FirstLinkBaseband bb_first_link(const CMatrix& eff1, int users, double p_t_mw);

/// Regularized zero-forcing precoder (eff2^H eff2 + beta N_RFu I)^-1 eff2^H.
CMatrix bb_second_link(const CMatrix& eff2, double beta);

HbfStages complete_stages(const RfStages& rf, const ChannelPair& ch, int users, double p_t_mw, double noise_mw);

}  // namespace uavrelay
