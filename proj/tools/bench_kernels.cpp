// Micro-benchmark comparing the serial reference kernels against the OpenMP
// ones, and the two classification routes against each other.  Also verifies
// that every variant produces identical results before timing it.
//
// usage: bench_kernels [n1 n2 reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "vlos/engine.hpp"

using namespace vlos;
using Clock = std::chrono::steady_clock;

namespace {

ScenarioConfig bench_config(int n1, int n2) {
  ScenarioConfig c;
  c.ring_length = 14400.0 * (n1 + n2) / 360.0;  // keep the published density
  c.lanes[0] = {n1, 27.7, 30.5, 0.5, 0.3, 40.5, 40.5, 0.0};
  c.lanes[1] = {n2, 19.44, 22.2, 0.5, 0.2, 36.0, 36.0, 0.0};
  c.init_mode = InitMode::uniform_random;
  c.rng_seed = 12345;
  c.sim_steps = 10;
  c.warmup_steps = 0;
  c.tx_id = 0;
  c.headway_track_ids.clear();  // defaults assume the full-size fleet
  validate(c);
  return c;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool same_state(const SimulationState& a, const SimulationState& b) {
  for (size_t i = 0; i < a.veh.size(); ++i)
    if (a.veh[i].x_curr != b.veh[i].x_curr || a.veh[i].x_prev != b.veh[i].x_prev ||
        a.veh[i].lane != b.veh[i].lane)
      return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int n1 = 160, n2 = 200, reps = 50;
  if (argc >= 3) {
    n1 = std::atoi(argv[1]);
    n2 = std::atoi(argv[2]);
  }
  if (argc >= 4) reps = std::atoi(argv[3]);

  const ScenarioConfig cfg = bench_config(n1, n2);
  std::printf("bench: %d + %d vehicles, ring %.0f m, %d reps\n", n1, n2, cfg.ring_length, reps);

  // settle the traffic a little so the scene is representative
  Engine warm(cfg);
  for (int i = 0; i < 200; ++i) warm.advance_substep();
  const SimulationState base = warm.state();

  // motion kernels: identical trajectories first, then timing
  {
    SimulationState sa = base, sb = base;
    for (int i = 0; i < 20; ++i) {
      step_positions_serial(sa, cfg, 1000 + i);
      step_positions_omp(sb, cfg, 1000 + i);
    }
    if (!same_state(sa, sb)) {
      std::fprintf(stderr, "FAIL: serial and OpenMP motion kernels diverge\n");
      return 1;
    }

    SimulationState s = base;
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) step_positions_serial(s, cfg, 2000 + i);
    const double serial_ms = ms_since(t0) / reps;
    s = base;
    t0 = Clock::now();
    for (int i = 0; i < reps; ++i) step_positions_omp(s, cfg, 2000 + i);
    const double omp_ms = ms_since(t0) / reps;
    std::printf("motion:   serial %8.3f ms/step   omp %8.3f ms/step   (match ok)\n", serial_ms,
                omp_ms);
  }

  // classification: all four variants must agree exactly
  {
    ScenarioConfig seg = cfg, wed = cfg;
    seg.classifier = ClassifierRoute::segment;
    wed.classifier = ClassifierRoute::wedge;
    LinkMatrix m_ss, m_sw, m_os, m_ow;
    classify_tick_serial(base, seg, m_ss);
    classify_tick_serial(base, wed, m_sw);
    classify_tick_omp(base, seg, m_os);
    classify_tick_omp(base, wed, m_ow);
    if (m_ss.state != m_sw.state || m_ss.state != m_os.state || m_ss.state != m_ow.state) {
      std::fprintf(stderr, "FAIL: classification variants disagree\n");
      return 1;
    }

    auto time_route = [&](const ScenarioConfig& c, bool omp) {
      LinkMatrix m;
      const auto t0 = Clock::now();
      for (int i = 0; i < reps; ++i)
        omp ? classify_tick_omp(base, c, m) : classify_tick_serial(base, c, m);
      return ms_since(t0) / reps;
    };
    std::printf("classify: serial/segment %8.3f ms/tick   serial/wedge %8.3f ms/tick\n",
                time_route(seg, false), time_route(wed, false));
    std::printf("classify: omp/segment    %8.3f ms/tick   omp/wedge    %8.3f ms/tick   (match ok)\n",
                time_route(seg, true), time_route(wed, true));
  }
  return 0;
}
