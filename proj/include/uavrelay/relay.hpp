#pragma once

#include "uavrelay/pso.hpp"
#include "uavrelay/system.hpp"

namespace uavrelay {

enum class BufferMode { WithoutBuffer, WithBuffer };

struct BufferPolicy {
  BufferMode mode = BufferMode::WithoutBuffer;
  Point2D loc_rx;  // where the first hop is received
  Point2D loc_tx;  // where the second hop is sent; ignored without a buffer
  double queue_bits = 0.0;
};

struct RelayOutcome {
  BufferPolicy policy;
  PowerAlloc alloc;  // second-hop powers at the transmit location
  double r1 = 0.0;
  double r2 = 0.0;
  double r_total = 0.0;
};

/// Without a buffer both hops use loc_rx. An empty allocation means equal
/// power at the transmit location.
RelayOutcome buffered_rate(const RealizationFactory& f, const BufferPolicy& policy, const PowerAlloc& alloc = {});

/// Fixed nominal location with equal power, no buffer.
RelayOutcome fixed_policy(const RealizationFactory& f);

/// Joint location and power search at a single location.
RelayOutcome optimize_without_buffer(const RealizationFactory& f, const PsoConfig& cfg);

/// Separate searches for the receive location (first hop) and the transmit
/// location plus powers (second hop). The candidates in `incumbents` compete
/// with the swarm results hop by hop, so the outcome never rates below them.
RelayOutcome optimize_with_buffer(const RealizationFactory& f, const PsoConfig& cfg,
                                  const std::vector<RelayOutcome>& incumbents = {});

/// Little's law D = Q / min(R1, R2), seconds per unit bandwidth.
double little_delay(double r1, double r2, double queue_bits);

}  // namespace uavrelay
