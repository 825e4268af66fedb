#pragma once
// Scenario configuration: ring road geometry, per-lane driver parameters,
// vehicle dimensions and run control.  Loaded from flat JSON files
// (// comments allowed); unknown keys are rejected to catch typos.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vlos {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How the momentum term of the discrete update is scaled.  "as_printed"
// multiplies the previous displacement by lambda*tau (units follow the
// published difference scheme); "dimensionless" multiplies by lambda alone.
enum class VelocityTermMode { as_printed, dimensionless };

enum class InitMode { equal_spacing, uniform_random };

// Which classification kernel the engine runs.  Both produce identical
// results; "wedge" prunes obstacle candidates by shadow angle first.
enum class ClassifierRoute { wedge, segment };

struct LaneParams {
  int initial_count = 0;  // vehicles placed at t=0
  double v_avg = 0.0;     // initial speed, m/s
  double v_max = 0.0;     // optimal-velocity ceiling parameter, m/s
  double tau = 0.0;       // update interval / driver delay, s
  double lambda = 0.0;    // sensitivity to the previous displacement
  double d_p = 0.0;       // preceding-gap scale in the optimal-velocity curve, m
  double d_f = 0.0;       // minimum follower gap required to accept a newcomer, m
  double alpha = 0.0;     // continuous-model sensitivity; recorded, unused by the discrete update
};

struct VehicleDims {
  double length = 4.8;  // m, along travel direction
  double width = 1.8;   // m, across lanes
  // antenna position relative to the footprint centre
  double antenna_offset_long = 0.0;
  double antenna_offset_lat = 0.0;
};

struct ScenarioConfig {
  double ring_length = 14400.0;  // m
  int lane_count = 2;
  double lane_width = 3.5;       // m; lane centres sit at +-lane_width/2

  std::array<LaneParams, 2> lanes{};  // [0] = outer/fast lane 1, [1] = inner/slow lane 2
  VehicleDims dims{};

  double beta1 = 0.7;  // weight of the own-lane headway
  double beta2 = 0.3;  // weight of the target-lane preceding gap
  double r_c = 500.0;  // communication range, m

  std::int64_t sim_steps = 10800;    // sampled seconds in total
  std::int64_t warmup_steps = 3600;  // leading seconds excluded from statistics
  std::uint64_t rng_seed = 0;

  VelocityTermMode velocity_term_mode = VelocityTermMode::as_printed;
  InitMode init_mode = InitMode::equal_spacing;
  ClassifierRoute classifier = ClassifierRoute::wedge;

  bool lane_changes_enabled = true;
  // Never advance past (current gap to leader - collision margin) in one step.
  // The raw velocity rule is crash-capable far from equilibrium (a wide gap in
  // the other lane inflates the weighted headway of a boxed-in vehicle); with
  // the clamp, same-lane gaps stay >= margin by induction and the clamp is
  // inactive wherever the dynamics are already sane.
  bool hard_brake_guard = true;
  double lane_change_cooldown = 10.0;  // s a vehicle stays put after switching; 0 = none
  double safety_time_gap = 0.0;        // s; >0 replaces d_p/d_f by (speed * gap) per vehicle
  double init_min_gap = 10.0;          // m, guaranteed spacing floor for uniform_random placement
  // Per-vehicle free-speed spread: each vehicle gets a fixed factor drawn
  // uniformly from [1-s, 1+s] that scales its lane's v_max.  0 keeps the
  // population homogeneous; with identical drivers the flow settles into a
  // rigid per-lane cruise where same-lane gaps freeze, which no amount of
  // lane changing breaks up.
  double speed_dispersion = 0.0;

  int tx_id = 20;                    // designated transmitter for link logs and interval stats
  double profile_bin_width = 25.0;   // m, LOS-share histogram resolution
  std::vector<int> headway_track_ids{60, 120, 180};  // vehicles whose headway series is logged

  // nominal demand recorded alongside achieved flow in the run manifest, veh/h
  double flow_nominal_lane1 = 1300.0;
  double flow_nominal_lane2 = 1600.0;

  int threads = 0;  // OpenMP fan-out for the kernels; 0 = library default

  double time_step() const { return lanes[0].tau; }
  // closer than this is a physical overlap -> simulation fault
  double collision_margin() const { return dims.length; }
  int total_vehicles() const { return lanes[0].initial_count + lanes[1].initial_count; }
  double lane_center_y(int lane) const { return lane == 0 ? -0.5 * lane_width : 0.5 * lane_width; }
};

// Parse + apply overrides + validate.  Overrides are "key=value" strings using
// the same keys as the file.  Throws ConfigError with the offending key/rule.
ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides = {});
ScenarioConfig config_from_json_text(const std::string& text,
                                     const std::vector<std::string>& overrides = {},
                                     const std::string& origin = "<inline>");
void validate(const ScenarioConfig& cfg);

// Canonical serialized form (sorted keys) and a stable 64-bit hash of it; the
// hash names runs in the manifest so identical configs are recognisable.
std::string to_canonical_json(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);

// veh/h past a fixed observer for `count` vehicles circulating at `speed`
double flow_veh_per_hour(int count, double speed, double ring_length);

}  // namespace vlos
