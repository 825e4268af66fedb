#pragma once
// Kinematic state of the ring: two time levels per vehicle plus per-lane
// cyclic orderings kept sorted by current position.

#include <array>
#include <cstdint>
#include <vector>

#include "vlos/config.hpp"

namespace vlos {

struct VehicleState {
  int id = 0;
  int lane = 0;         // 0 = outer (fast), 1 = inner (slow)
  double x_prev = 0.0;  // position at t - tau, wrapped to [0, ring_length)
  double x_curr = 0.0;  // position at t, wrapped to [0, ring_length)
};

// Gaps a vehicle sees when deciding motion and lane changes.  All distances
// are forward arcs at the current time level, >= 0; an empty target lane
// reports ring_length for both target gaps.
struct NeighborView {
  double dx = 0.0;    // headway to the same-lane vehicle ahead
  double dx_p = 0.0;  // gap to the target-lane vehicle ahead
  double dx_f = 0.0;  // gap back to the target-lane follower
  double dv = 0.0;    // closing speed on the same-lane leader, m/s (diagnostic)
  int leader_id = -1;    // same-lane vehicle ahead; -1 when alone
  int preceder_id = -1;  // target-lane vehicle ahead; -1 when the lane is empty
  int follower_id = -1;  // target-lane vehicle behind; -1 when the lane is empty
};

struct SimulationState {
  double ring_length = 0.0;
  std::vector<VehicleState> veh;               // indexed by vehicle id
  std::array<std::vector<int>, 2> lane_order;  // ids sorted ascending by x_curr
  std::vector<std::int64_t> last_change_step;  // substep of each vehicle's last lane switch
  std::vector<int> order_pos;                  // index of each vehicle inside its lane_order
  std::vector<double> vmax_factor;             // per-vehicle free-speed factor; empty = all 1

  double wrap(double x) const;                      // into [0, ring_length)
  double fwd_gap(double from, double to) const;     // forward arc from -> to, [0, L)
  double signed_offset(double from, double to) const;  // shortest arc, [-L/2, L/2)
  double displacement(int vid) const;               // wrapped x_curr - x_prev

  // the vehicle's own top speed: its factor applied to the lane limit
  double vmax_of(int vid, double lane_vmax) const {
    return vmax_factor.empty() ? lane_vmax : lane_vmax * vmax_factor[vid];
  }

  int lane_size(int lane) const { return static_cast<int>(lane_order[lane].size()); }
  // same-lane leader headway; ring_length when the vehicle is alone
  double headway(int vid) const;
  void rebuild_order_pos();
  // verify lane_order matches membership and stays ascending; test support
  bool orders_consistent() const;
};

// Deterministic initial placement per the configured mode.  Throws
// ConfigError when a lane cannot physically hold its vehicles.
SimulationState init_scenario(const ScenarioConfig& cfg);

// Gaps for one vehicle against the current orderings (target lane = the
// other lane).  tau converts the leader displacement difference into the
// diagnostic closing speed.  Used by the motion update, lane-change rules
// and tests.
NeighborView compute_neighbor_view(const SimulationState& s, int vid, double tau = 1.0);

}  // namespace vlos
