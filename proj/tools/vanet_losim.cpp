// Command-line front end: run the two-lane ring scenario, classify sight
// states, accumulate obstruction statistics and evaluate reception curves.
//
// Exit codes: 0 success, 2 configuration problem, 3 collision abort,
// 4 output I/O failure.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "vlos/engine.hpp"
#include "vlos/outputs.hpp"

namespace {

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  int error_code = 0;
  double mu_P = 0.0, mu_p = 0.0;
};

int run_seed_range(const vlos::ScenarioConfig& base, const vlos::ChannelConfig* models,
                   const std::string& out, std::uint64_t a, std::uint64_t b) {
  const int count = static_cast<int>(b - a + 1);
  unsigned cap = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("VANET_LOSIM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<unsigned>(v);
  }
  const unsigned workers = std::min<unsigned>(std::max(1u, cap), count);

  std::vector<SeedOutcome> results(count);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      SeedOutcome& r = results[i];
      r.seed = a + i;
      vlos::ScenarioConfig cfg = base;
      cfg.rng_seed = r.seed;
      cfg.threads = 1;  // concurrency comes from the seed fan-out here
      try {
        const vlos::RunResult rr =
            vlos::run_simulation(cfg, models, out + "/" + std::to_string(r.seed));
        r.ok = true;
        r.mu_P = rr.pooled_summary.mu_P;
        r.mu_p = rr.pooled_summary.mu_p;
      } catch (const vlos::ConfigError& e) {
        r.error = e.what();
        r.error_code = 2;
      } catch (const vlos::CollisionFault& e) {
        r.error = e.what();
        r.error_code = 3;
      } catch (const vlos::IoError& e) {
        r.error = e.what();
        r.error_code = 4;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  int rc = 0;
  for (const SeedOutcome& r : results) {
    if (r.ok) {
      std::printf("seed %llu: mu_P=%.6g mu_p=%.6g\n", static_cast<unsigned long long>(r.seed),
                  r.mu_P, r.mu_p);
    } else {
      std::fprintf(stderr, "seed %llu failed: %s\n", static_cast<unsigned long long>(r.seed),
                   r.error.c_str());
      if (rc == 0) rc = r.error_code;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-lane ring traffic simulator with sight classification and reception analysis"};
  std::string scenario, models_path, out, seeds_range;
  long long seed = 0;
  std::vector<std::string> sets;
  bool figures_only = false;

  app.add_option("--scenario", scenario, "scenario config file (JSON)");
  app.add_option("--models", models_path, "path-loss models config file (JSON)");
  app.add_option("--out", out, "output directory")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override rng_seed for this run");
  app.add_option("--set", sets, "config override key=value (repeatable)");
  app.add_flag("--figures-only", figures_only,
               "rebuild the figure CSVs from an existing run directory and exit");
  app.add_option("--seeds", seeds_range,
                 "run seeds a..b into per-seed subdirectories (VANET_LOSIM_THREADS caps the "
                 "parallel fan-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (figures_only) {
      vlos::write_figures(out);
      std::printf("figures rebuilt in %s\n", out.c_str());
      return 0;
    }
    if (scenario.empty()) throw vlos::ConfigError("--scenario is required unless --figures-only");
    if (seed_opt->count() > 0 && !seeds_range.empty())
      throw vlos::ConfigError("--seed and --seeds are mutually exclusive");

    std::vector<std::string> overrides = sets;
    if (seed_opt->count() > 0) overrides.push_back("rng_seed=" + std::to_string(seed));
    const vlos::ScenarioConfig cfg = vlos::load_config(scenario, overrides);

    vlos::ChannelConfig models;
    const bool have_models = !models_path.empty();
    if (have_models) models = vlos::load_models(models_path);

    if (!seeds_range.empty()) {
      const auto dots = seeds_range.find("..");
      if (dots == std::string::npos)
        throw vlos::ConfigError("--seeds expects a range like 1..50, got '" + seeds_range + "'");
      char* end = nullptr;
      const unsigned long long a = std::strtoull(seeds_range.c_str(), &end, 10);
      const unsigned long long b = std::strtoull(seeds_range.c_str() + dots + 2, nullptr, 10);
      if (end != seeds_range.c_str() + dots || b < a)
        throw vlos::ConfigError("--seeds range must be a..b with a <= b");
      return run_seed_range(cfg, have_models ? &models : nullptr, out, a, b);
    }

    std::int64_t last_report = -1;
    const vlos::RunResult res = vlos::run_simulation(
        cfg, have_models ? &models : nullptr, out, [&](std::int64_t tick) {
          if (tick - last_report >= 600 || tick == 0) {
            std::fprintf(stderr, "tick %lld/%lld\n", static_cast<long long>(tick),
                         static_cast<long long>(cfg.sim_steps - cfg.warmup_steps));
            last_report = tick;
          }
        });

    std::printf("run complete: %s\n", out.c_str());
    if (res.pooled_summary.n_P > 0)
      std::printf("  mu_P = %.6g per m over %d vehicles\n", res.pooled_summary.mu_P,
                  res.pooled_summary.n_P);
    if (res.pooled_summary.n_p > 0)
      std::printf("  mu_p = %.6g per m over %d vehicles\n", res.pooled_summary.mu_p,
                  res.pooled_summary.n_p);
    std::printf("  headway span [%.2f, %.2f] m, %lld lane changes, %.1f s wall\n",
                res.headway_min, res.headway_max,
                static_cast<long long>(res.lane_change_count), res.wall_seconds);
    return 0;
  } catch (const vlos::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const vlos::CollisionFault& e) {
    std::fprintf(stderr, "simulation aborted: %s\n", e.what());
    return 3;
  } catch (const vlos::IoError& e) {
    std::fprintf(stderr, "output error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
