#include "vlos/engine.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "json.hpp"
#include "vlos/outputs.hpp"

namespace vlos {

Engine::Engine(const ScenarioConfig& cfg) : cfg_(cfg), state_(init_scenario(cfg)) {
  dist_second_.assign(state_.veh.size(), 0.0);
}

std::vector<LaneChangeEvent> Engine::advance_substep() {
  std::vector<LaneChangeEvent> events = apply_lane_changes(state_, cfg_, substep_);
  if (serial_) step_positions_serial(state_, cfg_, substep_ + 1);
  else step_positions_omp(state_, cfg_, substep_ + 1);
  ++substep_;
  for (size_t v = 0; v < state_.veh.size(); ++v)
    dist_second_[v] += state_.displacement(static_cast<int>(v));
  return events;
}

std::vector<LaneChangeEvent> Engine::advance_second() {
  std::fill(dist_second_.begin(), dist_second_.end(), 0.0);
  std::vector<LaneChangeEvent> events = advance_substep();
  std::vector<LaneChangeEvent> second = advance_substep();
  events.insert(events.end(), second.begin(), second.end());
  return events;
}

namespace {

const char* state_name(LinkState s) {
  switch (s) {
    case LinkState::LOS: return "LOS";
    case LinkState::OLOS: return "OLOS";
    default: return "OoR";
  }
}

std::string iso_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// emit a right-continuous CDF: one row per distinct value
template <class Row>
void emit_cdf(std::vector<double> values, const Row& row) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[j + 1] == values[i]) ++j;
    row(values[i], static_cast<double>(j + 1) / n);
    i = j + 1;
  }
}

}  // namespace

RunResult run_simulation(const ScenarioConfig& cfg, const ChannelConfig* models,
                         const std::string& out_dir,
                         const std::function<void(std::int64_t)>& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = iso_utc_now();
  ensure_dir(out_dir);
  const std::string dir = out_dir.back() == '/' ? out_dir : out_dir + "/";

  Engine eng(cfg);
  const int n = cfg.total_vehicles();
  const double tau = cfg.time_step();

  CsvWriter trace(dir + "trace.csv", "tick,vehicle_id,lane,x_m,speed_mps");
  CsvWriter changes(dir + "lane_changes.csv", "tick,vehicle_id,from_lane,to_lane,x_m");
  CsvWriter link_log(dir + "link_log.csv", "tick,tx_id,rx_id,state");
  CsvWriter counts(dir + "state_counts.csv", "tick,n_los,n_olos,n_in_range");
  CsvWriter headways(dir + "headways.csv", "tick,vehicle_id,headway_m");

  PairStateTracker tracker(n, cfg.tx_id, DistanceProfile(cfg.profile_bin_width, cfg.r_c));
  LinkMatrix matrix;
  std::vector<double> pending_dist(n, 0.0), zeros(n, 0.0);
  bool baseline_done = false;

  RunResult res;
  res.cfg = cfg;
  res.headway_min = std::numeric_limits<double>::infinity();
  res.headway_max = -std::numeric_limits<double>::infinity();
  res.mean_speed.assign(2, 0.0);
  double in_range_sum = 0.0;
  std::vector<double> speed_sum(2, 0.0), count_sum(2, 0.0);
  char buf[160];

  for (std::int64_t s = 0; s < cfg.sim_steps; ++s) {
    const bool measured = s >= cfg.warmup_steps;
    if (measured) {
      const std::int64_t tick = s - cfg.warmup_steps;
      if (progress) progress(tick);

      // vehicle trace + headway extremes + per-lane speed sums
      double lane_speed[2] = {0, 0};
      int lane_n[2] = {0, 0};
      for (int v = 0; v < n; ++v) {
        const VehicleState& vs = eng.state().veh[v];
        const double speed = eng.state().displacement(v) / tau;
        std::snprintf(buf, sizeof buf, "%lld,%d,%d,%.6f,%.6f", static_cast<long long>(tick), v,
                      vs.lane + 1, vs.x_curr, speed);
        trace.row(buf);
        lane_speed[vs.lane] += speed;
        ++lane_n[vs.lane];
        const double hw = eng.state().headway(v);
        res.headway_min = std::min(res.headway_min, hw);
        res.headway_max = std::max(res.headway_max, hw);
      }
      for (int l = 0; l < 2; ++l) {
        if (lane_n[l] > 0) speed_sum[l] += lane_speed[l] / lane_n[l];
        count_sum[l] += lane_n[l];
      }
      for (int id : cfg.headway_track_ids) {
        std::snprintf(buf, sizeof buf, "%lld,%d,%.6f", static_cast<long long>(tick), id,
                      eng.state().headway(id));
        headways.row(buf);
      }

      // classification + statistics
      if (eng.serial_kernels()) classify_tick_serial(eng.state(), cfg, matrix);
      else classify_tick_omp(eng.state(), cfg, matrix);
      tracker.update(matrix, baseline_done ? pending_dist : zeros, cfg.threads);
      baseline_done = true;

      int n_los = 0, n_olos = 0;
      const std::uint8_t* tx_row = matrix.state.data() + static_cast<size_t>(cfg.tx_id) * n;
      for (int rx = 0; rx < n; ++rx) {
        if (rx == cfg.tx_id) continue;
        const LinkState st = static_cast<LinkState>(tx_row[rx]);
        if (st == LinkState::LOS) ++n_los;
        else if (st == LinkState::OLOS) ++n_olos;
        std::snprintf(buf, sizeof buf, "%lld,%d,%d,%s", static_cast<long long>(tick), cfg.tx_id,
                      rx, state_name(st));
        link_log.row(buf);
      }
      std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d", static_cast<long long>(tick), n_los, n_olos,
                    n_los + n_olos);
      counts.row(buf);
      in_range_sum += n_los + n_olos;
      ++res.measured_ticks;
    }

    if (s + 1 < cfg.sim_steps) {
      const std::vector<LaneChangeEvent> events = eng.advance_second();
      if (measured) {
        const std::int64_t tick = s - cfg.warmup_steps;
        for (const LaneChangeEvent& e : events) {
          std::snprintf(buf, sizeof buf, "%lld,%d,%d,%d,%.6f", static_cast<long long>(tick),
                        e.vehicle_id, e.from_lane + 1, e.to_lane + 1, e.x);
          changes.row(buf);
        }
        res.lane_change_count += static_cast<std::int64_t>(events.size());
        pending_dist = eng.dist_last_second();
      }
    }
  }
  tracker.finalize();

  trace.close();
  changes.close();
  link_log.close();
  counts.close();
  headways.close();

  // interval lengths with respect to the designated transmitter
  {
    CsvWriter w(dir + "intervals.csv", "state,length_m");
    for (double v : tracker.los_intervals()) w.row(std::string("LOS,") + CsvWriter::num(v, 6));
    for (double v : tracker.olos_intervals()) w.row(std::string("OLOS,") + CsvWriter::num(v, 6));
    w.close();
  }

  // per-vehicle transition intensities, pooled and designated-tx views
  auto write_intensities = [&](const std::string& path, const std::vector<IntensityTotals>& tt) {
    CsvWriter w(path,
                "vehicle_id,n_los_olos,d_los_m,P_per_m,n_olos_los,d_olos_m,p_per_m,d_total_m");
    for (int v = 0; v < n; ++v) {
      const IntensityTotals& t = tt[v];
      const IntensityEstimate e = intensity_from(t);
      std::string line = std::to_string(v) + "," + std::to_string(t.n_los_olos) + "," +
                         CsvWriter::num(t.d_los, 3) + "," +
                         (e.has_P ? CsvWriter::num_g(e.P) : "") + "," +
                         std::to_string(t.n_olos_los) + "," + CsvWriter::num(t.d_olos, 3) + "," +
                         (e.has_p ? CsvWriter::num_g(e.p) : "") + "," +
                         CsvWriter::num(tracker.vehicle_distance()[v], 3);
      w.row(line);
    }
    w.close();
  };
  write_intensities(dir + "intensities.csv", tracker.pooled());
  write_intensities(dir + "intensities_tx.csv", tracker.wrt_tx());

  {
    const DistanceProfile& p = tracker.profile();
    CsvWriter w(dir + "distance_profile.csv",
                "bin_low_m,bin_high_m,bin_center_m,n_los,n_olos,pr_los,pr_olos");
    for (int b = 0; b < p.bins(); ++b) {
      std::string line = CsvWriter::num(p.bin_low(b), 3) + "," + CsvWriter::num(p.bin_high(b), 3) +
                         "," + CsvWriter::num(p.bin_center(b), 3) + "," +
                         std::to_string(p.n_los[b]) + "," + std::to_string(p.n_olos[b]) + ",";
      if (p.defined(b))
        line += CsvWriter::num_g(p.pr_los(b)) + "," + CsvWriter::num_g(1.0 - p.pr_los(b));
      else line += ",";
      w.row(line);
    }
    w.close();
  }

  if (models) {
    const std::vector<CurveRow> rows = curve_sweep(*models, &tracker.profile());
    CsvWriter w(dir + "channel_curves.csv", "d_m,model,mean_rx_dbm,prp");
    for (const CurveRow& r : rows) {
      std::string line = CsvWriter::num(r.d, 3) + "," + r.model + ",";
      line += std::isnan(r.mean_rx_dbm) ? "" : CsvWriter::num(r.mean_rx_dbm, 6);
      line += "," + CsvWriter::num_g(r.prp);
      w.row(line);
    }
    w.close();
  }

  res.pooled_summary = summarize_intensities(tracker.pooled());
  res.wrt_tx_summary = summarize_intensities(tracker.wrt_tx());
  res.mean_in_range = res.measured_ticks > 0 ? in_range_sum / res.measured_ticks : 0.0;
  res.profile = tracker.profile();
  for (int l = 0; l < 2; ++l)
    res.mean_speed[l] = res.measured_ticks > 0 ? speed_sum[l] / res.measured_ticks : 0.0;
  res.lane_count_end = {static_cast<std::int64_t>(eng.state().lane_order[0].size()),
                        static_cast<std::int64_t>(eng.state().lane_order[1].size())};
  if (!std::isfinite(res.headway_min)) res.headway_min = res.headway_max = 0.0;

  res.files_written = {"trace.csv",       "lane_changes.csv", "link_log.csv",
                       "state_counts.csv", "headways.csv",     "intervals.csv",
                       "intensities.csv",  "intensities_tx.csv", "distance_profile.csv"};
  if (models) res.files_written.push_back("channel_curves.csv");

  write_figures(out_dir);
  for (const char* f : {"fig3_headway_cdf.csv", "fig4_state_counts_cdf.csv",
                        "fig5_interval_cdf.csv", "fig6_intensity_cdf.csv",
                        "fig7_distance_profile.csv"})
    res.files_written.push_back(f);
  if (models) {
    res.files_written.push_back("fig8_rx_power.csv");
    res.files_written.push_back("fig9_prp.csv");
  }

  const auto t1 = std::chrono::steady_clock::now();
  res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  // run manifest: identity, headline numbers, file inventory, timing.
  // timestamps and wall time make this file run-specific; determinism
  // comparisons cover the CSV outputs, not the manifest.
  {
    nlohmann::json j;
    j["version"] = "vanet-losim 1.0.0";
    j["config_hash"] = config_hash(cfg);
    j["rng_seed"] = cfg.rng_seed;
    j["sim_steps"] = cfg.sim_steps;
    j["warmup_steps"] = cfg.warmup_steps;
    j["measured_ticks"] = res.measured_ticks;
    j["designated_tx"] = cfg.tx_id;
    nlohmann::json files = nlohmann::json::array();
    for (const std::string& f : res.files_written) {
      nlohmann::json e;
      e["file"] = f;
      const std::string text = read_text_file(dir + f);
      e["bytes"] = text.size();
      files.push_back(e);
    }
    j["outputs"] = files;
    nlohmann::json h;
    h["mu_P_per_m"] = res.pooled_summary.n_P > 0 ? nlohmann::json(res.pooled_summary.mu_P)
                                                 : nlohmann::json();
    h["mu_p_per_m"] = res.pooled_summary.n_p > 0 ? nlohmann::json(res.pooled_summary.mu_p)
                                                 : nlohmann::json();
    h["n_vehicles_with_P"] = res.pooled_summary.n_P;
    h["n_vehicles_with_p"] = res.pooled_summary.n_p;
    h["mu_P_per_m_designated_tx"] =
        res.wrt_tx_summary.n_P > 0 ? nlohmann::json(res.wrt_tx_summary.mu_P) : nlohmann::json();
    h["mu_p_per_m_designated_tx"] =
        res.wrt_tx_summary.n_p > 0 ? nlohmann::json(res.wrt_tx_summary.mu_p) : nlohmann::json();
    h["mean_vehicles_in_range"] = res.mean_in_range;
    h["headway_min_m"] = res.headway_min;
    h["headway_max_m"] = res.headway_max;
    h["lane_changes"] = res.lane_change_count;
    h["collision"] = "none";
    for (int l = 0; l < 2; ++l) {
      const std::string p = "lane" + std::to_string(l + 1) + "_";
      h[p + "count_end"] = res.lane_count_end[l];
      h[p + "mean_speed_mps"] = res.mean_speed[l];
      h[p + "flow_nominal_veh_h"] = l == 0 ? cfg.flow_nominal_lane1 : cfg.flow_nominal_lane2;
      const double mean_count = res.measured_ticks > 0 ? count_sum[l] / res.measured_ticks : 0.0;
      h[p + "flow_achieved_veh_h"] =
          flow_veh_per_hour(static_cast<int>(std::llround(mean_count)), res.mean_speed[l],
                            cfg.ring_length);
    }
    j["headline"] = h;
    nlohmann::json timing;
    timing["started_utc"] = started;
    timing["finished_utc"] = iso_utc_now();
    timing["wall_s"] = res.wall_seconds;
    j["timing"] = timing;

    std::FILE* f = std::fopen((dir + "run_manifest.json").c_str(), "wb");
    if (!f) throw IoError("cannot write " + dir + "run_manifest.json");
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
    res.files_written.push_back("run_manifest.json");
  }

  return res;
}

void write_figures(const std::string& out_dir) {
  const std::string dir = out_dir.back() == '/' ? out_dir : out_dir + "/";
  for (const char* req : {"headways.csv", "state_counts.csv", "intervals.csv",
                          "intensities_tx.csv", "distance_profile.csv"})
    if (!file_exists(dir + req)) throw IoError("figures: missing input " + dir + req);

  // headway distribution per tracked vehicle
  {
    const CsvTable t = read_csv(dir + "headways.csv");
    std::vector<int> ids;
    std::vector<std::vector<double>> samples;
    for (const auto& r : t.rows) {
      const int id = std::stoi(r[1]);
      size_t k = 0;
      for (; k < ids.size(); ++k)
        if (ids[k] == id) break;
      if (k == ids.size()) {
        ids.push_back(id);
        samples.emplace_back();
      }
      samples[k].push_back(std::stod(r[2]));
    }
    CsvWriter w(dir + "fig3_headway_cdf.csv", "vehicle_id,headway_m,cdf");
    for (size_t k = 0; k < ids.size(); ++k)
      emit_cdf(samples[k], [&](double v, double c) {
        w.row(std::to_string(ids[k]) + "," + CsvWriter::num(v, 6) + "," + CsvWriter::num_g(c));
      });
    w.close();
  }

  // distributions of the per-tick neighbourhood counts around the tx
  {
    const CsvTable t = read_csv(dir + "state_counts.csv");
    std::vector<double> los, olos, in_range;
    for (const auto& r : t.rows) {
      los.push_back(std::stod(r[1]));
      olos.push_back(std::stod(r[2]));
      in_range.push_back(std::stod(r[3]));
    }
    CsvWriter w(dir + "fig4_state_counts_cdf.csv", "quantity,count,cdf");
    const char* names[3] = {"in_range", "los", "olos"};
    std::vector<double>* vecs[3] = {&in_range, &los, &olos};
    for (int q = 0; q < 3; ++q) {
      if (vecs[q]->empty()) continue;
      emit_cdf(*vecs[q], [&](double v, double c) {
        w.row(std::string(names[q]) + "," + CsvWriter::num(v, 0) + "," + CsvWriter::num_g(c));
      });
    }
    w.close();
  }

  // sight-interval length distributions
  {
    const CsvTable t = read_csv(dir + "intervals.csv");
    std::vector<double> los, olos;
    for (const auto& r : t.rows) (r[0] == "LOS" ? los : olos).push_back(std::stod(r[1]));
    CsvWriter w(dir + "fig5_interval_cdf.csv", "state,length_m,cdf");
    emit_cdf(los, [&](double v, double c) {
      w.row("LOS," + CsvWriter::num(v, 6) + "," + CsvWriter::num_g(c));
    });
    emit_cdf(olos, [&](double v, double c) {
      w.row("OLOS," + CsvWriter::num(v, 6) + "," + CsvWriter::num_g(c));
    });
    w.close();
  }

  // per-vehicle transition intensity distributions (designated tx)
  {
    const CsvTable t = read_csv(dir + "intensities_tx.csv");
    std::vector<double> P, p;
    for (const auto& r : t.rows) {
      if (!r[3].empty()) P.push_back(std::stod(r[3]));
      if (!r[6].empty()) p.push_back(std::stod(r[6]));
    }
    CsvWriter w(dir + "fig6_intensity_cdf.csv", "metric,value_per_m,cdf");
    emit_cdf(P, [&](double v, double c) {
      w.row("P," + CsvWriter::num_g(v) + "," + CsvWriter::num_g(c));
    });
    emit_cdf(p, [&](double v, double c) {
      w.row("p," + CsvWriter::num_g(v) + "," + CsvWriter::num_g(c));
    });
    w.close();
  }

  // LOS share vs distance, populated bins only
  {
    const CsvTable t = read_csv(dir + "distance_profile.csv");
    CsvWriter w(dir + "fig7_distance_profile.csv", "bin_center_m,pr_los,pr_olos,n_samples");
    for (const auto& r : t.rows) {
      const long long tot = std::stoll(r[3]) + std::stoll(r[4]);
      if (tot == 0) continue;
      w.row(r[2] + "," + r[5] + "," + r[6] + "," + std::to_string(tot));
    }
    w.close();
  }

  // channel curves pivoted wide: one column per model
  if (file_exists(dir + "channel_curves.csv")) {
    const CsvTable t = read_csv(dir + "channel_curves.csv");
    std::vector<std::string> model_names;
    std::vector<double> ds;
    for (const auto& r : t.rows) {
      if (std::find(model_names.begin(), model_names.end(), r[1]) == model_names.end())
        model_names.push_back(r[1]);
      const double d = std::stod(r[0]);
      if (std::find(ds.begin(), ds.end(), d) == ds.end()) ds.push_back(d);
    }
    std::sort(ds.begin(), ds.end());
    auto cell = [&](double d, const std::string& model, int col) -> std::string {
      for (const auto& r : t.rows)
        if (r[1] == model && std::stod(r[0]) == d) return r[col];
      return "";
    };
    {
      std::string hdr = "d_m";
      for (const auto& m : model_names)
        if (m != "joint") hdr += "," + m;
      CsvWriter w(dir + "fig8_rx_power.csv", hdr);
      for (double d : ds) {
        std::string line = CsvWriter::num(d, 3);
        for (const auto& m : model_names)
          if (m != "joint") line += "," + cell(d, m, 2);
        w.row(line);
      }
      w.close();
    }
    {
      std::string hdr = "d_m";
      for (const auto& m : model_names) hdr += "," + m;
      CsvWriter w(dir + "fig9_prp.csv", hdr);
      for (double d : ds) {
        std::string line = CsvWriter::num(d, 3);
        for (const auto& m : model_names) line += "," + cell(d, m, 3);
        w.row(line);
      }
      w.close();
    }
  }
}

}  // namespace vlos
