#include "vlos/statistics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlos {

IntensityEstimate intensity_from(const IntensityTotals& t) {
  IntensityEstimate e;
  if (t.d_los > 0) {
    e.has_P = true;
    e.P = static_cast<double>(t.n_los_olos) / t.d_los;
  }
  if (t.d_olos > 0) {
    e.has_p = true;
    e.p = static_cast<double>(t.n_olos_los) / t.d_olos;
  }
  return e;
}

IntensitySummary summarize_intensities(const std::vector<IntensityTotals>& per_vehicle) {
  IntensitySummary s;
  double sum_P = 0, sum_p = 0;
  for (const auto& t : per_vehicle) {
    const IntensityEstimate e = intensity_from(t);
    if (e.has_P) {
      sum_P += e.P;
      ++s.n_P;
    }
    if (e.has_p) {
      sum_p += e.p;
      ++s.n_p;
    }
  }
  s.mu_P = s.n_P > 0 ? sum_P / s.n_P : 0.0;
  s.mu_p = s.n_p > 0 ? sum_p / s.n_p : 0.0;
  return s;
}

void PairRun::on_sample(LinkState next, double dist, IntensityTotals& totals,
                        std::vector<double>* closed_los, std::vector<double>* closed_olos) {
  // distance covered since the previous sample accrues to the outgoing state
  if (started) {
    if (prev == LinkState::LOS) {
      totals.d_los += dist;
      run_len += dist;
    } else if (prev == LinkState::OLOS) {
      totals.d_olos += dist;
      run_len += dist;
    }
  }
  if (started && next != prev) {
    if (prev == LinkState::LOS && next == LinkState::OLOS) ++totals.n_los_olos;
    if (prev == LinkState::OLOS && next == LinkState::LOS) ++totals.n_olos_los;
    // leaving LOS/OLOS for any state closes the running interval; a hop
    // through OoR closes without counting a transition
    if (prev == LinkState::LOS && closed_los) closed_los->push_back(run_len);
    if (prev == LinkState::OLOS && closed_olos) closed_olos->push_back(run_len);
    run_len = 0.0;
  }
  prev = next;
  started = true;
}

void PairRun::finalize(std::vector<double>* closed_los, std::vector<double>* closed_olos) {
  if (!started) return;
  if (prev == LinkState::LOS && closed_los) closed_los->push_back(run_len);
  if (prev == LinkState::OLOS && closed_olos) closed_olos->push_back(run_len);
  run_len = 0.0;
  started = false;
}

DistanceProfile::DistanceProfile(double width, double d_max) : bin_width(width) {
  const int nb = std::max(1, static_cast<int>(std::ceil(d_max / width - 1e-12)));
  n_los.assign(nb, 0);
  n_olos.assign(nb, 0);
}

int DistanceProfile::bin_of(double d) const {
  // bin k covers (k*w, (k+1)*w]
  int k = static_cast<int>(std::ceil(d / bin_width)) - 1;
  if (k < 0) k = 0;
  if (k >= bins()) k = bins() - 1;
  return k;
}

void DistanceProfile::add(double d, LinkState s) {
  if (s == LinkState::LOS) ++n_los[bin_of(d)];
  else if (s == LinkState::OLOS) ++n_olos[bin_of(d)];
}

double DistanceProfile::pr_los(int bin) const {
  const std::int64_t tot = n_los[bin] + n_olos[bin];
  return tot > 0 ? static_cast<double>(n_los[bin]) / tot : 0.0;
}

PairStateTracker::PairStateTracker(int n, int designated_tx, const DistanceProfile& profile_shape)
    : n_(n),
      tx_(designated_tx),
      runs_(static_cast<size_t>(n) * n),
      tx_runs_(n),
      pooled_(n),
      wrt_tx_(n),
      veh_dist_(n, 0.0),
      row_los_(n),
      row_olos_(n),
      profile_(profile_shape) {}

void PairStateTracker::update(const LinkMatrix& m, const std::vector<double>& dist_moved,
                              int threads) {
  const int n = n_;
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  // The matrix is symmetric, so the (tx, rx) sample sits at [rx][tx] too and
  // each receiver row scans contiguously.  Rows are independent, so the
  // parallel split is over receivers; all accumulation per receiver stays in
  // fixed tx order, keeping results identical at any thread count.
#pragma omp parallel for schedule(static) num_threads(nt)
  for (int rx = 0; rx < n; ++rx) {
    const double moved = dist_moved[rx];
    const std::uint8_t* row = m.state.data() + static_cast<size_t>(rx) * n;
    PairRun* runs = runs_.data() + static_cast<size_t>(rx) * n;
    IntensityTotals& pooled = pooled_[rx];
    for (int tx = 0; tx < n; ++tx) {
      if (tx == rx) continue;
      runs[tx].on_sample(static_cast<LinkState>(row[tx]), moved, pooled, nullptr, nullptr);
    }
    // a second, independent state machine feeds the designated-transmitter
    // totals and its closed-interval lists
    if (rx != tx_)
      tx_runs_[rx].on_sample(static_cast<LinkState>(row[tx_]), moved, wrt_tx_[rx], &row_los_[rx],
                             &row_olos_[rx]);
  }

  // distance profile over ordered in-range pairs + per-vehicle travel
  for (int rx = 0; rx < n; ++rx) veh_dist_[rx] += dist_moved[rx];
  for (int rx = 0; rx < n; ++rx) {
    const std::uint8_t* row = m.state.data() + static_cast<size_t>(rx) * n;
    const float* drow = m.dist.data() + static_cast<size_t>(rx) * n;
    for (int tx = 0; tx < n; ++tx) {
      const LinkState st = static_cast<LinkState>(row[tx]);
      if (st != LinkState::OoR) profile_.add(drow[tx], st);
    }
  }
}

void PairStateTracker::finalize() {
  if (finalized_) return;
  finalized_ = true;
  // pooled totals accrue distance sample by sample, so only the designated
  // row has open intervals to flush
  for (int rx = 0; rx < n_; ++rx) {
    if (rx == tx_) continue;
    tx_runs_[rx].finalize(&row_los_[rx], &row_olos_[rx]);
  }
  los_intervals_.clear();
  olos_intervals_.clear();
  for (int rx = 0; rx < n_; ++rx) {
    los_intervals_.insert(los_intervals_.end(), row_los_[rx].begin(), row_los_[rx].end());
    olos_intervals_.insert(olos_intervals_.end(), row_olos_[rx].begin(), row_olos_[rx].end());
  }
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("EmpiricalCdf: no samples");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / sorted_.size();
}

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  if (n != b.size() || n < 2) return std::nan("");
  auto ranks = [](const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&v](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (i + j) + 1.0;  // average rank for the tie group
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, va = 0, vb = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0 || vb == 0) return std::nan("");
  return num / std::sqrt(va * vb);
}

}  // namespace vlos
