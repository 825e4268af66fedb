#pragma once
// Analytical link budget: log-distance path loss (single or dual slope),
// Gaussian large-scale fading, packet reception probability against a
// carrier-sense threshold, and the sight-weighted joint reception curve.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlos/statistics.hpp"

namespace vlos {

struct PathLossModel {
  std::string name;
  double pl0 = 0.0;    // dB at the reference distance
  double n1 = 0.0;     // first-slope exponent
  double n2 = 0.0;     // second-slope exponent (dual-slope only)
  double d0 = 10.0;    // reference distance, m
  double db = std::numeric_limits<double>::infinity();  // breakpoint, m; inf = single slope
  double sigma = 0.0;  // shadow-fading std dev, dB

  bool dual_slope() const { return std::isfinite(db); }
};

struct LinkBudget {
  double pw_tx = 20.0;   // transmit power, dBm
  double csth = -91.0;   // carrier-sense threshold, dBm
};

// Mean path loss in dB; throws std::domain_error for d < d0 (model undefined
// below the reference distance).
double path_loss_mean(double d, const PathLossModel& m);

// pw_tx - path_loss_mean, dBm
double rx_power_mean(double d, const PathLossModel& m, const LinkBudget& b);

// Gaussian tail probability Q(x) = P[N(0,1) > x]
double q_function(double x);

// P[received power > csth] under N(mean, sigma^2) shadowing; sigma == 0
// degenerates to a step (0.5 exactly on the threshold).
double prob_rx_above(double d, const PathLossModel& m, const LinkBudget& b);

// LOS-share-weighted mix of two models at distance d; throws
// std::invalid_argument when d falls in an unpopulated profile bin.
double joint_prp(double d, const PathLossModel& los, const PathLossModel& olos,
                 const DistanceProfile& profile, const LinkBudget& b);

// Deterministic N(0, sigma) sampler for Monte-Carlo shadowing experiments.
// Hand-rolled Box-Muller over mt19937_64 (std distributions are
// implementation-defined, the engine is not), so sequences match across
// platforms.
class ShadowSampler {
 public:
  explicit ShadowSampler(std::uint64_t seed) : eng_(seed) {}
  double draw(double sigma);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct ChannelConfig {
  std::vector<PathLossModel> models;
  LinkBudget budget{};
  std::string joint_los;   // model names the joint curve mixes; empty = no joint
  std::string joint_olos;
  double d_min = 10.0, d_max = 500.0, d_step = 5.0;  // sweep grid, m
};

// JSON model file (comments allowed, unknown keys rejected).
ChannelConfig load_models(const std::string& path);
ChannelConfig models_from_json_text(const std::string& text,
                                    const std::string& origin = "<inline>");

struct CurveRow {
  double d = 0.0;
  std::string model;       // model name, or "joint" for the mixed curve
  double mean_rx_dbm = 0.0;
  double prp = 0.0;
};

std::vector<double> sweep_grid(const ChannelConfig& cfg);

// Mean received power and reception probability for every model over the
// grid, plus the joint curve when both mix models are configured and a
// profile is supplied.  Grid distances whose profile bin is unpopulated are
// skipped for the joint curve only.
std::vector<CurveRow> curve_sweep(const ChannelConfig& cfg, const DistanceProfile* profile);

const PathLossModel* find_model(const ChannelConfig& cfg, const std::string& name);

}  // namespace vlos
