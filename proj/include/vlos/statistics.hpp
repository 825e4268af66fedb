#pragma once
// Obstruction statistics over the measured phase: per-pair sight-interval
// bookkeeping, transition intensities (events per metre travelled), the
// LOS share as a function of distance, and empirical CDFs for reporting.

#include <cstdint>
#include <vector>

#include "vlos/los_geometry.hpp"

namespace vlos {

// Per-receiver travel totals within each sight state plus direct
// LOS<->OLOS transition counts.  Distances accrue to the state held at the
// start of each sampled second (left-aligned rule).
struct IntensityTotals {
  std::int64_t n_los_olos = 0;  // LOS -> OLOS events
  std::int64_t n_olos_los = 0;  // OLOS -> LOS events
  double d_los = 0.0;           // m travelled while in LOS
  double d_olos = 0.0;          // m travelled while obstructed
};

struct IntensityEstimate {
  bool has_P = false, has_p = false;
  double P = 0.0;  // LOS->OLOS events per metre of LOS travel
  double p = 0.0;  // OLOS->LOS events per metre of OLOS travel
};

// P = n_los_olos / d_los (absent when no LOS travel), p likewise.
IntensityEstimate intensity_from(const IntensityTotals& t);

struct IntensitySummary {
  double mu_P = 0.0, mu_p = 0.0;  // means over vehicles with a defined estimate
  int n_P = 0, n_p = 0;           // how many vehicles contributed to each mean
};
IntensitySummary summarize_intensities(const std::vector<IntensityTotals>& per_vehicle);

// State machine for one ordered (tx, rx) pair.  Feed one sample per second:
// the distance travelled since the previous sample accrues to the state held
// before it; a direct LOS<->OLOS flip closes the running interval and counts
// a transition; passing through OoR closes intervals without counting.
struct PairRun {
  LinkState prev = LinkState::OoR;
  bool started = false;
  double run_len = 0.0;

  // interval_sink: nullptr, or two vectors {los, olos} receiving closed runs
  void on_sample(LinkState next, double dist, IntensityTotals& totals,
                 std::vector<double>* closed_los, std::vector<double>* closed_olos);
  void finalize(std::vector<double>* closed_los, std::vector<double>* closed_olos);
};

// LOS share vs antenna distance.  Bin k covers (k*w, (k+1)*w]; distance 0
// pairs (co-located antennas cannot occur) would land in bin 0.
struct DistanceProfile {
  double bin_width = 25.0;
  std::vector<std::int64_t> n_los, n_olos;

  DistanceProfile() = default;
  DistanceProfile(double width, double d_max);
  int bins() const { return static_cast<int>(n_los.size()); }
  int bin_of(double d) const;
  void add(double d, LinkState s);
  bool defined(int bin) const { return n_los[bin] + n_olos[bin] > 0; }
  double pr_los(int bin) const;  // share of LOS observations in the bin
  double bin_center(int bin) const { return (bin + 0.5) * bin_width; }
  double bin_low(int bin) const { return bin * bin_width; }
  double bin_high(int bin) const { return (bin + 1) * bin_width; }
};

// Whole-fleet tracker: every ordered pair's PairRun, pooled per-receiver
// totals over all transmitter perspectives, a separate set of totals and
// closed-interval lists for the designated transmitter, and the distance
// profile.  update() consumes one classified tick; the per-vehicle
// dist_moved[i] is the wrapped distance vehicle i covered since the
// previous sample.
class PairStateTracker {
 public:
  PairStateTracker(int n, int designated_tx, const DistanceProfile& profile_shape);

  void update(const LinkMatrix& m, const std::vector<double>& dist_moved, int threads);
  void finalize();

  int n() const { return n_; }
  const std::vector<IntensityTotals>& pooled() const { return pooled_; }       // per rx, all tx
  const std::vector<IntensityTotals>& wrt_tx() const { return wrt_tx_; }       // per rx, designated tx
  const std::vector<double>& vehicle_distance() const { return veh_dist_; }    // per vehicle, m
  const std::vector<double>& los_intervals() const { return los_intervals_; }  // wrt designated tx
  const std::vector<double>& olos_intervals() const { return olos_intervals_; }
  const DistanceProfile& profile() const { return profile_; }

 private:
  int n_ = 0;
  int tx_ = 0;
  bool finalized_ = false;
  std::vector<PairRun> runs_;     // row-major [rx][tx]: row rx scans contiguously
  std::vector<PairRun> tx_runs_;  // designated-tx machines, one per receiver
  std::vector<IntensityTotals> pooled_, wrt_tx_;
  std::vector<double> veh_dist_;
  std::vector<std::vector<double>> row_los_, row_olos_;  // per-rx closed intervals wrt tx_
  std::vector<double> los_intervals_, olos_intervals_;
  DistanceProfile profile_;
};

// Right-continuous empirical distribution of a sample set.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);  // throws std::invalid_argument on empty
  double operator()(double x) const;                   // fraction of samples <= x
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

// Spearman rank correlation (average ranks on ties); NaN when either side
// is constant.  Used for monotone-trend checks on binned curves.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace vlos
