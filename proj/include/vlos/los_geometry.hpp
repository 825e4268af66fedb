#pragma once
// Sight classification between vehicle pairs: LOS / obstructed (OLOS) /
// out of range.  Geometry lives on a per-transmitter unrolled chart: the ring
// is cut at the transmitter's antipode, lanes become parallel lines, vehicles
// become axis-aligned rectangles, and a link is obstructed when the open
// antenna-to-antenna segment meets any other vehicle's rectangle (boundary
// touch counts as blocked).

#include <array>
#include <cstdint>
#include <vector>

#include "vlos/config.hpp"
#include "vlos/sim_state.hpp"

namespace vlos {

enum class LinkState : std::uint8_t { OoR = 0, LOS = 1, OLOS = 2 };

struct Point {
  double x = 0.0, y = 0.0;
};

struct Footprint {
  Point center;
  double half_length = 0.0;  // along x
  double half_width = 0.0;   // along y
  std::array<Point, 4> corners() const;
};

// Euclidean range gate, closed disk (d == r_c still in range)
bool in_range(const Point& a, const Point& b, double r_c);

// Does the open segment (p0, p1) meet the closed rectangle?  Touching the
// boundary (corner grazing included) blocks; touching only at an endpoint of
// the segment does not.
bool segment_blocked(const Point& p0, const Point& p1, const Footprint& rect);

// Dense pairwise classification for one tick.  state/dist are n*n row-major,
// row = transmitter id, column = receiver id; diagonal is OoR, dist is the
// antenna separation in metres for in-range pairs and -1 otherwise.
struct LinkMatrix {
  int n = 0;
  std::vector<std::uint8_t> state;
  std::vector<float> dist;

  void resize(int n_);
  LinkState at(int tx, int rx) const { return static_cast<LinkState>(state[static_cast<size_t>(tx) * n + rx]); }
  float dist_at(int tx, int rx) const { return dist[static_cast<size_t>(tx) * n + rx]; }
};

// One transmitter's row.  out_state/out_dist must hold n entries.  The
// "wedge" route prunes obstacle candidates by their shadow-angle interval
// before the exact segment test; results are identical to the plain route.
void classify_row(const SimulationState& s, const ScenarioConfig& cfg, int tx,
                  ClassifierRoute route, std::uint8_t* out_state, float* out_dist);

// Convenience form of one row for tests and spot checks.
std::vector<LinkState> classify_all(const SimulationState& s, const ScenarioConfig& cfg, int tx,
                                    ClassifierRoute route);

void classify_tick_serial(const SimulationState& s, const ScenarioConfig& cfg, LinkMatrix& out);
void classify_tick_omp(const SimulationState& s, const ScenarioConfig& cfg, LinkMatrix& out);

}  // namespace vlos
