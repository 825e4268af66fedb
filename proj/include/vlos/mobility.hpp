#pragma once
// Two-lane optimal-velocity car following on the ring plus incentive/safety
// lane changing.  The discrete update advances one tau step at a time; the
// serial and OpenMP position kernels are interchangeable bit-for-bit.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlos/sim_state.hpp"

namespace vlos {

// Physical overlap detected after a position update; aborts the run.
struct CollisionFault : std::runtime_error {
  CollisionFault(std::int64_t step_, int a, int b, double gap_, const std::string& what_)
      : std::runtime_error(what_), step(step_), id_a(a), id_b(b), gap(gap_) {}
  std::int64_t step;  // substep index (multiply by tau for seconds)
  int id_a, id_b;
  double gap;
};

// v = 0.5*v_max*(tanh(x_tilde - d_p) + tanh(d_p)); smooth, bounded, increasing
double optimal_velocity(double x_tilde, double d_p, double v_max);

// x_tilde = beta1*dx + beta2*dx_p
double weighted_headway(double dx, double dx_p, double beta1, double beta2);

// Incentive + safety test against the target lane.  d_p comes from the
// subject's lane, d_f from the target lane; both may be speed-scaled by the
// caller when a safety time gap is configured.
bool lane_change_eligible(const NeighborView& view, double d_p_subject, double d_f_target);

struct LaneChangeEvent {
  std::int64_t step = 0;  // substep at which the move was applied
  int vehicle_id = 0;
  int from_lane = 0;  // 0-based
  int to_lane = 0;
  double x = 0.0;
};

// One lane-change pass: claimants in ascending position order (outer lane
// first on exact ties), each re-evaluated against moves already applied.
// Returns the applied events; respects the per-vehicle cooldown.
std::vector<LaneChangeEvent> apply_lane_changes(SimulationState& s, const ScenarioConfig& cfg,
                                                std::int64_t step);

// Advance every position by one tau step (two-level update), then re-sort the
// cyclic orders and check the collision margin.  `step` indexes the substep
// being produced and is reported in CollisionFault.
void step_positions_serial(SimulationState& s, const ScenarioConfig& cfg, std::int64_t step);
void step_positions_omp(SimulationState& s, const ScenarioConfig& cfg, std::int64_t step);

}  // namespace vlos
