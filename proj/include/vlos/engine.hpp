#pragma once
// Run orchestration: initialise, warm up, sample once per second, classify,
// accumulate statistics, and write every output file.  Engine exposes the
// substep-level controls the invariant tests drive directly; run_simulation
// is the one-call form behind the CLI.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vlos/channel.hpp"
#include "vlos/los_geometry.hpp"
#include "vlos/mobility.hpp"
#include "vlos/statistics.hpp"

namespace vlos {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg);

  const ScenarioConfig& cfg() const { return cfg_; }
  SimulationState& state() { return state_; }
  const SimulationState& state() const { return state_; }
  std::int64_t substep() const { return substep_; }

  // One lane-change pass followed by one tau position update; returns the
  // applied lane changes.  Throws CollisionFault on margin violation.
  std::vector<LaneChangeEvent> advance_substep();
  // Two substeps = one sampled second.
  std::vector<LaneChangeEvent> advance_second();

  // OpenMP kernels or serial references; defaults to OpenMP.
  void use_serial_kernels(bool serial) { serial_ = serial; }
  bool serial_kernels() const { return serial_; }

  // per-vehicle distance covered during the most recent advance_second()
  const std::vector<double>& dist_last_second() const { return dist_second_; }

 private:
  ScenarioConfig cfg_;
  SimulationState state_;
  std::int64_t substep_ = 0;
  bool serial_ = false;
  std::vector<double> dist_second_;
};

// Aggregates the engine produces over the measured phase; everything the
// output files and the acceptance checks consume.
struct RunResult {
  ScenarioConfig cfg;
  std::int64_t measured_ticks = 0;
  double wall_seconds = 0.0;

  IntensitySummary pooled_summary;   // headline means over all tx perspectives
  IntensitySummary wrt_tx_summary;   // designated-tx means
  double mean_in_range = 0.0;        // avg vehicles inside r_c of the designated tx
  double headway_min = 0.0, headway_max = 0.0;  // extremes over all vehicles/ticks
  std::int64_t lane_change_count = 0;
  DistanceProfile profile;
  std::vector<double> mean_speed;        // per lane, m/s over the measured phase
  std::vector<std::int64_t> lane_count_end;  // vehicles per lane at the end

  std::vector<std::string> files_written;  // relative to the output directory
};

// Full run: simulate, accumulate, write CSV outputs + run_manifest.json into
// out_dir (created if missing).  models may be null (channel outputs skipped).
// progress, when set, receives the sampled tick index once per simulated
// second (useful for long-run logging).
RunResult run_simulation(const ScenarioConfig& cfg, const ChannelConfig* models,
                         const std::string& out_dir,
                         const std::function<void(std::int64_t)>& progress = {});

// Rebuild the figure-oriented CSVs from an existing run directory without
// re-simulating.  Throws IoError when required inputs are missing.
void write_figures(const std::string& out_dir);

}  // namespace vlos
