#include "vlos/los_geometry.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vlos {

std::array<Point, 4> Footprint::corners() const {
  return {Point{center.x - half_length, center.y - half_width},
          Point{center.x + half_length, center.y - half_width},
          Point{center.x + half_length, center.y + half_width},
          Point{center.x - half_length, center.y + half_width}};
}

bool in_range(const Point& a, const Point& b, double r_c) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return std::sqrt(dx * dx + dy * dy) <= r_c;
}

bool segment_blocked(const Point& p0, const Point& p1, const Footprint& rect) {
  // Liang-Barsky clip of the parametric segment against the closed rectangle.
  // A nonempty clipped interval that reaches into (0,1) blocks; an interval
  // collapsed onto an endpoint only touches the antenna point and does not.
  double t0 = 0.0, t1 = 1.0;
  const double p[2] = {p0.x, p0.y};
  const double d[2] = {p1.x - p0.x, p1.y - p0.y};
  const double lo[2] = {rect.center.x - rect.half_length, rect.center.y - rect.half_width};
  const double hi[2] = {rect.center.x + rect.half_length, rect.center.y + rect.half_width};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - p[axis]) / d[axis];
    double tb = (hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;  // tangential corner graze keeps t0 == t1 -> blocked
  }
  return t1 > 0.0 && t0 < 1.0;
}

void LinkMatrix::resize(int n_) {
  n = n_;
  state.assign(static_cast<size_t>(n) * n, static_cast<std::uint8_t>(LinkState::OoR));
  dist.assign(static_cast<size_t>(n) * n, -1.0f);
}

namespace {

constexpr double kAngleEps = 1e-9;  // wedge inflation; candidates are re-confirmed exactly

// shadow of one obstacle as seen from the transmitter antenna: an angular
// interval (lo + [0, width], wrap-aware) plus the nearest approach distance
struct Wedge {
  double lo = 0.0;
  double width = 0.0;
  double near = 0.0;
  int vid = -1;
};

Wedge make_wedge(const Point& tx, const Footprint& fp, int vid) {
  Wedge w;
  w.vid = vid;
  const double theta_c = std::atan2(fp.center.y - tx.y, fp.center.x - tx.x);
  double dmin = 0.0, dmax = 0.0;
  for (const Point& c : fp.corners()) {
    const double delta = std::remainder(std::atan2(c.y - tx.y, c.x - tx.x) - theta_c, 2.0 * M_PI);
    dmin = std::min(dmin, delta);
    dmax = std::max(dmax, delta);
  }
  double lo = theta_c + dmin;
  if (lo <= -M_PI) lo += 2.0 * M_PI;
  if (lo > M_PI) lo -= 2.0 * M_PI;
  w.lo = lo;
  w.width = dmax - dmin;
  const double ex = std::max(std::abs(tx.x - fp.center.x) - fp.half_length, 0.0);
  const double ey = std::max(std::abs(tx.y - fp.center.y) - fp.half_width, 0.0);
  w.near = std::sqrt(ex * ex + ey * ey);
  return w;
}

bool wedge_may_block(const Wedge& w, double phi, double rho) {
  if (w.near > rho + kAngleEps) return false;
  double p = phi;
  if (p < w.lo - kAngleEps) p += 2.0 * M_PI;
  return p <= w.lo + w.width + kAngleEps;
}

// per-thread workspace so row classification allocates nothing steady-state
struct RowScratch {
  std::vector<int> cand;        // candidate receiver/obstacle ids near the tx
  std::vector<double> u;       // chart x of every vehicle relative to tx (by id)
  std::vector<Wedge> wedges;    // obstacle shadows, built on demand (wedge route)
};

RowScratch& scratch() {
  thread_local RowScratch rs;
  return rs;
}

}  // namespace

void classify_row(const SimulationState& s, const ScenarioConfig& cfg, int tx,
                  ClassifierRoute route, std::uint8_t* out_state, float* out_dist) {
  const int n = static_cast<int>(s.veh.size());
  std::memset(out_state, static_cast<int>(LinkState::OoR), n);
  std::fill(out_dist, out_dist + n, -1.0f);

  RowScratch& rs = scratch();
  rs.u.resize(n);
  rs.cand.clear();

  const VehicleState& t = s.veh[tx];
  const double half_len = 0.5 * cfg.dims.length;
  const double half_wid = 0.5 * cfg.dims.width;
  const double half_diag = std::sqrt(half_len * half_len + half_wid * half_wid);
  const double window = cfg.r_c + 2.0 * half_diag + 1.0;

  // chart around the transmitter: ring cut at its antipode, +x = travel
  for (int v = 0; v < n; ++v) rs.u[v] = s.signed_offset(t.x_curr, s.veh[v].x_curr);

  const Point tx_ant{rs.u[tx] + cfg.dims.antenna_offset_long,
                     cfg.lane_center_y(t.lane) + cfg.dims.antenna_offset_lat};

  for (int v = 0; v < n; ++v) {
    if (v == tx) continue;
    if (std::abs(rs.u[v]) <= window) rs.cand.push_back(v);
  }

  auto antenna_of = [&](int v) {
    return Point{rs.u[v] + cfg.dims.antenna_offset_long,
                 cfg.lane_center_y(s.veh[v].lane) + cfg.dims.antenna_offset_lat};
  };
  auto footprint_of = [&](int v) {
    return Footprint{Point{rs.u[v], cfg.lane_center_y(s.veh[v].lane)}, half_len, half_wid};
  };

  // same-lane rank rule: only the nearest vehicle each way is unobstructed.
  // With the collision margin >= vehicle_length and lane_width > vehicle
  // width this is exactly what the segment test yields, so the geometry
  // routes skip same-lane pairs.
  int nearest_ahead = -1, nearest_behind = -1;
  double best_ahead = 0.0, best_behind = 0.0;
  for (int v : rs.cand) {
    if (s.veh[v].lane != t.lane) continue;
    const Point a = antenna_of(v);
    const double dx = a.x - tx_ant.x, dy = a.y - tx_ant.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d > cfg.r_c) continue;
    const double du = rs.u[v];
    if (du >= 0.0) {  // abreast-at-zero cannot occur in-lane (margin); treat as ahead
      if (nearest_ahead < 0 || du < best_ahead) nearest_ahead = v, best_ahead = du;
    } else {
      if (nearest_behind < 0 || du > best_behind) nearest_behind = v, best_behind = du;
    }
    out_state[v] = static_cast<std::uint8_t>(LinkState::OLOS);
    out_dist[v] = static_cast<float>(d);
  }
  if (nearest_ahead >= 0) out_state[nearest_ahead] = static_cast<std::uint8_t>(LinkState::LOS);
  if (nearest_behind >= 0) out_state[nearest_behind] = static_cast<std::uint8_t>(LinkState::LOS);

  // cross-lane pairs take the obstruction test over both lanes' footprints
  const bool wedge_route = route == ClassifierRoute::wedge;
  if (wedge_route) {
    rs.wedges.clear();
    for (int v : rs.cand) rs.wedges.push_back(make_wedge(tx_ant, footprint_of(v), v));
  }

  for (int rx : rs.cand) {
    if (s.veh[rx].lane == t.lane) continue;
    const Point a = antenna_of(rx);
    const double dx = a.x - tx_ant.x, dy = a.y - tx_ant.y;
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d > cfg.r_c) continue;
    out_dist[rx] = static_cast<float>(d);

    bool blocked = false;
    if (wedge_route) {
      const double phi = std::atan2(dy, dx);
      for (const Wedge& w : rs.wedges) {
        if (w.vid == rx) continue;
        if (!wedge_may_block(w, phi, d)) continue;
        if (segment_blocked(tx_ant, a, footprint_of(w.vid))) {
          blocked = true;
          break;
        }
      }
    } else {
      for (int o : rs.cand) {
        if (o == rx) continue;
        if (segment_blocked(tx_ant, a, footprint_of(o))) {
          blocked = true;
          break;
        }
      }
    }
    out_state[rx] = static_cast<std::uint8_t>(blocked ? LinkState::OLOS : LinkState::LOS);
  }
}

std::vector<LinkState> classify_all(const SimulationState& s, const ScenarioConfig& cfg, int tx,
                                    ClassifierRoute route) {
  const int n = static_cast<int>(s.veh.size());
  std::vector<std::uint8_t> st(n);
  std::vector<float> d(n);
  classify_row(s, cfg, tx, route, st.data(), d.data());
  std::vector<LinkState> out(n);
  for (int i = 0; i < n; ++i) out[i] = static_cast<LinkState>(st[i]);
  return out;
}

void classify_tick_serial(const SimulationState& s, const ScenarioConfig& cfg, LinkMatrix& out) {
  const int n = static_cast<int>(s.veh.size());
  out.resize(n);
  for (int tx = 0; tx < n; ++tx)
    classify_row(s, cfg, tx, cfg.classifier, out.state.data() + static_cast<size_t>(tx) * n,
                 out.dist.data() + static_cast<size_t>(tx) * n);
}

void classify_tick_omp(const SimulationState& s, const ScenarioConfig& cfg, LinkMatrix& out) {
  const int n = static_cast<int>(s.veh.size());
  out.resize(n);
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int tx = 0; tx < n; ++tx)
    classify_row(s, cfg, tx, cfg.classifier, out.state.data() + static_cast<size_t>(tx) * n,
                 out.dist.data() + static_cast<size_t>(tx) * n);
}

}  // namespace vlos
