#include "vlos/mobility.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace vlos {

double optimal_velocity(double x_tilde, double d_p, double v_max) {
  return 0.5 * v_max * (std::tanh(x_tilde - d_p) + std::tanh(d_p));
}

double weighted_headway(double dx, double dx_p, double beta1, double beta2) {
  return beta1 * dx + beta2 * dx_p;
}

bool lane_change_eligible(const NeighborView& view, double d_p_subject, double d_f_target) {
  // incentive: cramped here, roomier over there; safety: follower keeps d_f
  return view.dx < 2.0 * d_p_subject && view.dx_p > view.dx && view.dx_f > d_f_target;
}

namespace {

// effective optimal-velocity gap scale for one vehicle
double effective_d_p(const SimulationState& s, const ScenarioConfig& cfg, int vid) {
  if (cfg.safety_time_gap <= 0) return cfg.lanes[s.veh[vid].lane].d_p;
  const double speed = s.displacement(vid) / cfg.time_step();
  return cfg.safety_time_gap * speed;
}

double effective_d_f(const SimulationState& s, const ScenarioConfig& cfg, int follower_id,
                     int target_lane) {
  if (cfg.safety_time_gap <= 0) return cfg.lanes[target_lane].d_f;
  if (follower_id < 0) return 0.0;  // empty lane: any gap is acceptable
  const double speed = s.displacement(follower_id) / cfg.time_step();
  return cfg.safety_time_gap * speed;
}

// Per-lane membership sorted by x_prev.  The optimal-velocity input is the
// gap at the previous time level; sorting the *current* members by their
// previous positions answers "who was ahead of me one step ago" even across
// lane changes and cross-lane position crossings.
using PrevOrder = std::array<std::vector<int>, 2>;

PrevOrder build_prev_order(const SimulationState& s) {
  PrevOrder po;
  for (int l = 0; l < 2; ++l) {
    po[l] = s.lane_order[l];
    std::sort(po[l].begin(), po[l].end(),
              [&s](int a, int b) { return s.veh[a].x_prev < s.veh[b].x_prev; });
  }
  return po;
}

// first member of `order` strictly ahead of x at the previous level
// (cyclically); -1 when there is none besides possibly the vehicle itself
int prev_ahead(const SimulationState& s, const std::vector<int>& order, double x, int self) {
  const int n = static_cast<int>(order.size());
  const auto cmp = [&s](double key, int id) { return key < s.veh[id].x_prev; };
  const int start = [&] {
    const auto it = std::upper_bound(order.begin(), order.end(), x, cmp);
    return it == order.end() ? 0 : static_cast<int>(it - order.begin());
  }();
  for (int k = 0; k < n; ++k) {
    const int id = order[(start + k) % n];
    if (id != self) return id;
  }
  return -1;
}

// New unwrapped position of one vehicle after a tau step.  Headways feeding
// the optimal-velocity term belong to the previous time level and are taken
// between the vehicles currently sharing the lane, at their previous
// positions.
double motion_target(const SimulationState& s, const ScenarioConfig& cfg, int vid,
                     const PrevOrder& prev_order) {
  const VehicleState& v = s.veh[vid];
  const LaneParams& lp = cfg.lanes[v.lane];
  const double tau = cfg.time_step();
  const double disp_v = s.fwd_gap(v.x_prev, v.x_curr);

  const auto& own = s.lane_order[v.lane];
  const int n_own = static_cast<int>(own.size());
  double dx_prev = s.ring_length;
  double dx_curr_own = s.ring_length;
  if (n_own > 1) {
    const int leader_now = own[(s.order_pos[vid] + 1) % n_own];
    dx_curr_own = s.fwd_gap(v.x_curr, s.veh[leader_now].x_curr);
    const int leader_then = prev_ahead(s, prev_order[v.lane], v.x_prev, vid);
    dx_prev = s.fwd_gap(v.x_prev, s.veh[leader_then].x_prev);
  }

  double dxp_prev = s.ring_length;
  const int preceder_then = prev_ahead(s, prev_order[1 - v.lane], v.x_prev, vid);
  if (preceder_then >= 0) dxp_prev = s.fwd_gap(v.x_prev, s.veh[preceder_then].x_prev);

  const double x_tilde = weighted_headway(dx_prev, dxp_prev, cfg.beta1, cfg.beta2);
  const double vel = optimal_velocity(x_tilde, effective_d_p(s, cfg, vid), s.vmax_of(vid, lp.v_max));
  const double memory =
      (cfg.velocity_term_mode == VelocityTermMode::as_printed ? lp.lambda * tau : lp.lambda) *
      disp_v;
  double advance = tau * vel + memory;
  // Emergency braking: never advance past where the leader currently stands
  // minus the margin.  The leader only moves forward, so every same-lane gap
  // stays >= margin once it starts there (lane entries are admitted only with
  // both gaps >= margin), and the clamp does nothing when the velocity rule
  // already keeps a sane distance.
  if (cfg.hard_brake_guard) advance = std::min(advance, std::max(0.0, dx_curr_own - cfg.collision_margin()));
  return v.x_curr + advance;
}

// Shift levels, wrap, restore the sorted orders and enforce the physical
// margin.  x_new holds unwrapped targets (>= x_curr).
void commit_positions(SimulationState& s, const ScenarioConfig& cfg,
                      const std::vector<double>& x_new, std::int64_t step, bool parallel,
                      int threads) {
  const int n = static_cast<int>(s.veh.size());
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
  for (int vid = 0; vid < n; ++vid) {
    VehicleState& v = s.veh[vid];
    v.x_prev = v.x_curr;
    v.x_curr = s.wrap(x_new[vid]);
  }

  for (int l = 0; l < 2; ++l) {
    auto& order = s.lane_order[l];
    const int m = static_cast<int>(order.size());
    if (m == 0) continue;
    // without overtaking the vehicles that crossed x=0 form a suffix of the
    // previous ascending order; rotate them to the front
    int wrapped = 0;
    while (wrapped < m && x_new[order[m - 1 - wrapped]] >= s.ring_length) ++wrapped;
    if (wrapped > 0 && wrapped < m) std::rotate(order.begin(), order.end() - wrapped, order.end());

    for (int i = 0; i + 1 < m; ++i) {
      if (s.veh[order[i]].x_curr > s.veh[order[i + 1]].x_curr) {
        throw CollisionFault(step, order[i], order[i + 1],
                             s.veh[order[i + 1]].x_curr - s.veh[order[i]].x_curr,
                             "vehicles " + std::to_string(order[i]) + " and " +
                                 std::to_string(order[i + 1]) + " crossed at step " +
                                 std::to_string(step) + " (t=" +
                                 std::to_string(step * cfg.time_step()) + " s)");
      }
    }
  }
  s.rebuild_order_pos();

  // physical overlap scan, deterministic first-offender order
  const double margin = cfg.collision_margin();
  for (int l = 0; l < 2; ++l) {
    const auto& order = s.lane_order[l];
    const int m = static_cast<int>(order.size());
    if (m < 2) continue;
    for (int i = 0; i < m; ++i) {
      const int a = order[i], b = order[(i + 1) % m];
      const double gap = s.fwd_gap(s.veh[a].x_curr, s.veh[b].x_curr);
      if (gap < margin) {
        throw CollisionFault(step, a, b, gap,
                             "collision: vehicles " + std::to_string(a) + " and " +
                                 std::to_string(b) + " at gap " + std::to_string(gap) +
                                 " m < margin " + std::to_string(margin) + " m, step " +
                                 std::to_string(step) + " (t=" +
                                 std::to_string(step * cfg.time_step()) + " s)");
      }
    }
  }
}

void step_positions(SimulationState& s, const ScenarioConfig& cfg, std::int64_t step,
                    bool parallel) {
  const int n = static_cast<int>(s.veh.size());
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
  const PrevOrder prev_order = build_prev_order(s);
  std::vector<double> x_new(n);
  if (parallel) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int vid = 0; vid < n; ++vid) x_new[vid] = motion_target(s, cfg, vid, prev_order);
  } else {
    for (int vid = 0; vid < n; ++vid) x_new[vid] = motion_target(s, cfg, vid, prev_order);
  }
  commit_positions(s, cfg, x_new, step, parallel, threads);
}

}  // namespace

void step_positions_serial(SimulationState& s, const ScenarioConfig& cfg, std::int64_t step) {
  step_positions(s, cfg, step, false);
}

void step_positions_omp(SimulationState& s, const ScenarioConfig& cfg, std::int64_t step) {
  step_positions(s, cfg, step, true);
}

std::vector<LaneChangeEvent> apply_lane_changes(SimulationState& s, const ScenarioConfig& cfg,
                                                std::int64_t step) {
  std::vector<LaneChangeEvent> events;
  if (!cfg.lane_changes_enabled) return events;

  const double tau = cfg.time_step();
  const std::int64_t cooldown_steps =
      static_cast<std::int64_t>(std::llround(cfg.lane_change_cooldown / tau));
  const double margin = cfg.collision_margin();

  // claimants in ascending position, outer lane first on exact ties, id last
  std::vector<int> claimants(s.veh.size());
  for (size_t i = 0; i < claimants.size(); ++i) claimants[i] = static_cast<int>(i);
  std::sort(claimants.begin(), claimants.end(), [&s](int a, int b) {
    const VehicleState &va = s.veh[a], &vb = s.veh[b];
    if (va.x_curr != vb.x_curr) return va.x_curr < vb.x_curr;
    if (va.lane != vb.lane) return va.lane < vb.lane;
    return a < b;
  });

  for (int vid : claimants) {
    if (step - s.last_change_step[vid] < cooldown_steps) continue;
    const int from = s.veh[vid].lane, to = 1 - from;
    // each claimant is judged against the orders as already modified by
    // earlier claimants this pass
    const NeighborView view = compute_neighbor_view(s, vid, tau);
    const double d_p = effective_d_p(s, cfg, vid);
    const double d_f = effective_d_f(s, cfg, view.follower_id, to);
    if (!lane_change_eligible(view, d_p, d_f)) continue;
    if (view.dx_p < margin || view.dx_f < margin) continue;  // physically too tight

    auto& src = s.lane_order[from];
    src.erase(src.begin() + s.order_pos[vid]);
    auto& dst = s.lane_order[to];
    const auto cmp = [&s](double x, int id) { return x < s.veh[id].x_curr; };
    const auto it = std::upper_bound(dst.begin(), dst.end(), s.veh[vid].x_curr, cmp);
    dst.insert(it, vid);
    s.veh[vid].lane = to;
    s.last_change_step[vid] = step;
    s.rebuild_order_pos();

    events.push_back({step, vid, from, to, s.veh[vid].x_curr});
  }
  return events;
}

}  // namespace vlos
