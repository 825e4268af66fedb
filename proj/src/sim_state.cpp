#include "vlos/sim_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace vlos {

double SimulationState::wrap(double x) const {
  double r = std::fmod(x, ring_length);
  if (r < 0) r += ring_length;
  // fmod can return ring_length-epsilon rounding up to L for x just below 0
  if (r >= ring_length) r -= ring_length;
  return r;
}

double SimulationState::fwd_gap(double from, double to) const {
  double g = to - from;
  if (g < 0) g += ring_length;
  if (g >= ring_length) g = std::fmod(g, ring_length);
  return g;
}

double SimulationState::signed_offset(double from, double to) const {
  double g = fwd_gap(from, to);
  if (g >= 0.5 * ring_length) g -= ring_length;
  return g;
}

double SimulationState::displacement(int vid) const {
  const VehicleState& v = veh[vid];
  return fwd_gap(v.x_prev, v.x_curr);
}

double SimulationState::headway(int vid) const {
  const VehicleState& v = veh[vid];
  const auto& order = lane_order[v.lane];
  const int n = static_cast<int>(order.size());
  if (n <= 1) return ring_length;
  const int i = order_pos[vid];
  const int leader = order[(i + 1) % n];
  return fwd_gap(v.x_curr, veh[leader].x_curr);
}

void SimulationState::rebuild_order_pos() {
  order_pos.assign(veh.size(), -1);
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < static_cast<int>(lane_order[l].size()); ++i)
      order_pos[lane_order[l][i]] = i;
}

bool SimulationState::orders_consistent() const {
  size_t total = 0;
  for (int l = 0; l < 2; ++l) {
    const auto& order = lane_order[l];
    total += order.size();
    for (size_t i = 0; i < order.size(); ++i) {
      const int vid = order[i];
      if (veh[vid].lane != l) return false;
      if (order_pos[vid] != static_cast<int>(i)) return false;
      if (i + 1 < order.size() && veh[order[i + 1]].x_curr < veh[vid].x_curr) return false;
    }
  }
  return total == veh.size();
}

namespace {

// sorted uniform draws stretched so every gap (wrap gap included) is >= min_gap
std::vector<double> random_ring_positions(int n, double ring_length, double min_gap,
                                          std::mt19937_64& eng) {
  auto unit = [&eng]() { return (eng() >> 11) * 0x1.0p-53; };  // [0,1), 53-bit
  std::vector<double> u(n);
  for (double& v : u) v = unit();
  std::sort(u.begin(), u.end());
  const double slack = ring_length - n * min_gap;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = u[i] * slack + i * min_gap;
  return x;
}

}  // namespace

SimulationState init_scenario(const ScenarioConfig& cfg) {
  SimulationState s;
  s.ring_length = cfg.ring_length;
  const int total = cfg.total_vehicles();
  s.veh.resize(total);
  s.last_change_step.assign(total, std::numeric_limits<std::int64_t>::min() / 2);

  std::mt19937_64 eng(cfg.rng_seed);
  int next_id = 0;
  for (int l = 0; l < 2; ++l) {
    const LaneParams& lp = cfg.lanes[l];
    const int n = lp.initial_count;
    const double occupied = (cfg.init_mode == InitMode::uniform_random)
                                ? n * cfg.init_min_gap
                                : n * cfg.dims.length;
    if (occupied >= cfg.ring_length)
      throw ConfigError("init: lane " + std::to_string(l + 1) + " cannot hold " +
                        std::to_string(n) + " vehicles on a " + std::to_string(cfg.ring_length) +
                        " m ring");

    std::vector<double> xs;
    if (cfg.init_mode == InitMode::equal_spacing) {
      xs.resize(n);
      const double spacing = cfg.ring_length / n;
      for (int i = 0; i < n; ++i) xs[i] = i * spacing;
    } else {
      xs = random_ring_positions(n, cfg.ring_length, cfg.init_min_gap, eng);
    }

    s.lane_order[l].resize(n);
    for (int i = 0; i < n; ++i) {
      VehicleState& v = s.veh[next_id];
      v.id = next_id;
      v.lane = l;
      v.x_curr = s.wrap(xs[i]);
      v.x_prev = v.x_curr;  // speeds assigned below once both lanes exist
      s.lane_order[l][i] = next_id;
      ++next_id;
    }
  }
  s.rebuild_order_pos();

  // Driver heterogeneity, drawn after placement so the same seed keeps the
  // same layout whether or not dispersion is on.
  if (cfg.speed_dispersion > 0) {
    auto unit = [&eng]() { return (eng() >> 11) * 0x1.0p-53; };
    s.vmax_factor.resize(total);
    for (double& f : s.vmax_factor) f = 1.0 + cfg.speed_dispersion * (2.0 * unit() - 1.0);
  }

  // Initial speeds.  Equal spacing starts every vehicle at its lane's v_avg.
  // Random placement would then slam tight groups straight into the steep
  // part of the optimal-velocity curve, so each vehicle instead starts at the
  // speed its local gaps sustain in steady state (the memory term amplifies
  // the velocity response by 1/(1-coef) there), capped at its top speed.
  std::vector<double> speed(total);
  for (int vid = 0; vid < total; ++vid) {
    const LaneParams& lp = cfg.lanes[s.veh[vid].lane];
    if (cfg.init_mode == InitMode::equal_spacing) {
      speed[vid] = lp.v_avg;
      continue;
    }
    const double vmax_v = s.vmax_of(vid, lp.v_max);
    const NeighborView view = compute_neighbor_view(s, vid, lp.tau);
    const double x_tilde = cfg.beta1 * view.dx + cfg.beta2 * view.dx_p;
    const double vel = 0.5 * vmax_v * (std::tanh(x_tilde - lp.d_p) + std::tanh(lp.d_p));
    const double coef = cfg.velocity_term_mode == VelocityTermMode::as_printed
                            ? lp.lambda * lp.tau
                            : lp.lambda;
    speed[vid] = std::clamp(vel / (1.0 - coef), 0.0, vmax_v);
  }
  for (int vid = 0; vid < total; ++vid) {
    const LaneParams& lp = cfg.lanes[s.veh[vid].lane];
    s.veh[vid].x_prev = s.wrap(s.veh[vid].x_curr - lp.tau * speed[vid]);
  }
  return s;
}

NeighborView compute_neighbor_view(const SimulationState& s, int vid, double tau) {
  NeighborView out;
  const VehicleState& v = s.veh[vid];
  const int l = v.lane, tl = 1 - l;
  const auto& own = s.lane_order[l];
  const int n_own = static_cast<int>(own.size());

  if (n_own <= 1) {
    out.dx = s.ring_length;
    out.dv = 0.0;
  } else {
    const int i = s.order_pos[vid];
    const int leader = own[(i + 1) % n_own];
    out.leader_id = leader;
    out.dx = s.fwd_gap(v.x_curr, s.veh[leader].x_curr);
    out.dv = (s.displacement(vid) - s.displacement(leader)) / tau;  // >0 closing on the leader
  }

  const auto& other = s.lane_order[tl];
  const int n_other = static_cast<int>(other.size());
  if (n_other == 0) {
    out.dx_p = s.ring_length;
    out.dx_f = s.ring_length;
    return out;
  }
  // first target-lane vehicle strictly ahead of x_curr (cyclic upper bound);
  // the one before it is the follower (gap 0 when exactly abreast); a single
  // target-lane vehicle plays both roles
  const auto cmp = [&s](double x, int id) { return x < s.veh[id].x_curr; };
  const auto it = std::upper_bound(other.begin(), other.end(), v.x_curr, cmp);
  const int pi = it == other.end() ? 0 : static_cast<int>(it - other.begin());
  const int fi = (pi + n_other - 1) % n_other;
  out.preceder_id = other[pi];
  out.follower_id = other[fi];
  out.dx_p = s.fwd_gap(v.x_curr, s.veh[other[pi]].x_curr);
  out.dx_f = s.fwd_gap(s.veh[other[fi]].x_curr, v.x_curr);
  return out;
}

}  // namespace vlos
