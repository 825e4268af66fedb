#include "vlos/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vlos {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw ConfigError(origin + ": " + msg);
}

double want_number(const json& v, const std::string& key, const std::string& origin) {
  if (!v.is_number()) fail(origin, "key '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t want_int(const json& v, const std::string& key, const std::string& origin) {
  if (!v.is_number_integer()) fail(origin, "key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

bool want_bool(const json& v, const std::string& key, const std::string& origin) {
  if (!v.is_boolean()) fail(origin, "key '" + key + "' must be true/false");
  return v.get<bool>();
}

std::string want_string(const json& v, const std::string& key, const std::string& origin) {
  if (!v.is_string()) fail(origin, "key '" + key + "' must be a string");
  return v.get<std::string>();
}

// apply one key to the config; returns false for unknown keys
bool apply_key(ScenarioConfig& c, const std::string& key, const json& v, const std::string& origin) {
  // per-lane keys: lane1_* / lane2_*
  if (key.rfind("lane1_", 0) == 0 || key.rfind("lane2_", 0) == 0) {
    LaneParams& lp = c.lanes[key[4] == '1' ? 0 : 1];
    const std::string sub = key.substr(6);
    if (sub == "count") lp.initial_count = static_cast<int>(want_int(v, key, origin));
    else if (sub == "v_avg") lp.v_avg = want_number(v, key, origin);
    else if (sub == "v_max") lp.v_max = want_number(v, key, origin);
    else if (sub == "tau") lp.tau = want_number(v, key, origin);
    else if (sub == "lambda") lp.lambda = want_number(v, key, origin);
    else if (sub == "d_p") lp.d_p = want_number(v, key, origin);
    else if (sub == "d_f") lp.d_f = want_number(v, key, origin);
    else if (sub == "alpha") lp.alpha = want_number(v, key, origin);
    else return false;
    return true;
  }

  if (key == "ring_length") c.ring_length = want_number(v, key, origin);
  else if (key == "lane_count") c.lane_count = static_cast<int>(want_int(v, key, origin));
  else if (key == "lane_width") c.lane_width = want_number(v, key, origin);
  else if (key == "vehicle_length") c.dims.length = want_number(v, key, origin);
  else if (key == "vehicle_width") c.dims.width = want_number(v, key, origin);
  else if (key == "antenna_offset_long") c.dims.antenna_offset_long = want_number(v, key, origin);
  else if (key == "antenna_offset_lat") c.dims.antenna_offset_lat = want_number(v, key, origin);
  else if (key == "beta1") c.beta1 = want_number(v, key, origin);
  else if (key == "beta2") c.beta2 = want_number(v, key, origin);
  else if (key == "r_c") c.r_c = want_number(v, key, origin);
  else if (key == "sim_steps") c.sim_steps = want_int(v, key, origin);
  else if (key == "warmup_steps") c.warmup_steps = want_int(v, key, origin);
  else if (key == "rng_seed") c.rng_seed = static_cast<std::uint64_t>(want_int(v, key, origin));
  else if (key == "velocity_term_mode") {
    const std::string s = want_string(v, key, origin);
    if (s == "as_printed") c.velocity_term_mode = VelocityTermMode::as_printed;
    else if (s == "dimensionless") c.velocity_term_mode = VelocityTermMode::dimensionless;
    else fail(origin, "velocity_term_mode must be 'as_printed' or 'dimensionless', got '" + s + "'");
  } else if (key == "init_mode") {
    const std::string s = want_string(v, key, origin);
    if (s == "equal_spacing") c.init_mode = InitMode::equal_spacing;
    else if (s == "uniform_random") c.init_mode = InitMode::uniform_random;
    else fail(origin, "init_mode must be 'equal_spacing' or 'uniform_random', got '" + s + "'");
  } else if (key == "classifier") {
    const std::string s = want_string(v, key, origin);
    if (s == "wedge") c.classifier = ClassifierRoute::wedge;
    else if (s == "segment") c.classifier = ClassifierRoute::segment;
    else fail(origin, "classifier must be 'wedge' or 'segment', got '" + s + "'");
  } else if (key == "lane_changes") c.lane_changes_enabled = want_bool(v, key, origin);
  else if (key == "hard_brake_guard") c.hard_brake_guard = want_bool(v, key, origin);
  else if (key == "lane_change_cooldown") c.lane_change_cooldown = want_number(v, key, origin);
  else if (key == "safety_time_gap") c.safety_time_gap = want_number(v, key, origin);
  else if (key == "init_min_gap") c.init_min_gap = want_number(v, key, origin);
  else if (key == "speed_dispersion") c.speed_dispersion = want_number(v, key, origin);
  else if (key == "tx_id") c.tx_id = static_cast<int>(want_int(v, key, origin));
  else if (key == "profile_bin_width") c.profile_bin_width = want_number(v, key, origin);
  else if (key == "headway_track_ids") {
    if (!v.is_array()) fail(origin, "headway_track_ids must be an array of vehicle ids");
    c.headway_track_ids.clear();
    for (const auto& e : v) c.headway_track_ids.push_back(static_cast<int>(want_int(e, key, origin)));
  } else if (key == "flow_nominal_lane1") c.flow_nominal_lane1 = want_number(v, key, origin);
  else if (key == "flow_nominal_lane2") c.flow_nominal_lane2 = want_number(v, key, origin);
  else if (key == "threads") c.threads = static_cast<int>(want_int(v, key, origin));
  else return false;
  return true;
}

json parse_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text, /*cb=*/nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) fail(origin, "top level must be a JSON object");
  return j;
}

// override strings look like "lane1_count=80" or "init_mode=uniform_random";
// the value side is parsed as JSON when possible, else taken as a string
json override_value(const std::string& raw) {
  json v = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) return json(raw);
  return v;
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text,
                                     const std::vector<std::string>& overrides,
                                     const std::string& origin) {
  json j = parse_json(text, origin);
  ScenarioConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (!apply_key(cfg, key, value, origin)) fail(origin, "unknown key '" + key + "'");
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(origin, "override '" + ov + "' is not of the form key=value");
    const std::string key = ov.substr(0, eq);
    const json value = override_value(ov.substr(eq + 1));
    if (!apply_key(cfg, key, value, "override " + key)) fail(origin, "unknown override key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open scenario config");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str(), overrides, path);
}

void validate(const ScenarioConfig& c) {
  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  check(c.ring_length > 0, "ring_length must be positive");
  check(c.lane_count == 2, "lane_count must be 2 (two-lane model)");
  check(c.lane_width > c.dims.width, "lane_width must exceed vehicle_width");
  check(c.dims.length > 0 && c.dims.width > 0, "vehicle dimensions must be positive");
  check(std::abs(c.dims.antenna_offset_long) <= c.dims.length / 2 &&
            std::abs(c.dims.antenna_offset_lat) <= c.dims.width / 2,
        "antenna offset must stay inside the vehicle footprint");
  for (int l = 0; l < 2; ++l) {
    const LaneParams& lp = c.lanes[l];
    const std::string tag = "lane" + std::to_string(l + 1);
    check(lp.initial_count >= 1, tag + "_count must be at least 1");
    check(lp.v_avg > 0, tag + "_v_avg must be positive");
    check(lp.v_max >= lp.v_avg, tag + "_v_max must be at least v_avg");
    check(lp.tau > 0, tag + "_tau must be positive");
    check(lp.lambda > 0 && lp.lambda < 1, tag + "_lambda must lie in (0, 1)");
    check(lp.d_p > 0, tag + "_d_p must be positive");
    check(lp.d_f > 0, tag + "_d_f must be positive");
  }
  check(c.lanes[0].lambda > c.lanes[1].lambda,
        "lane1_lambda must exceed lane2_lambda (outer lane is the responsive one)");
  check(c.lanes[0].tau == c.lanes[1].tau,
        "lane1_tau and lane2_tau must be equal (single shared update clock)");
  check(c.beta1 > c.beta2 && c.beta2 > 0,
        "beta1 > beta2 > 0 is required (own-lane headway dominates)");
  check(std::abs(c.beta1 + c.beta2 - 1.0) <= 1e-9, "beta1 + beta2 must equal 1");
  check(c.r_c > 0, "r_c must be positive");
  check(c.sim_steps >= 1, "sim_steps must be at least 1");
  check(c.warmup_steps >= 0 && c.warmup_steps < c.sim_steps,
        "warmup_steps must lie in [0, sim_steps)");
  check(c.lane_change_cooldown >= 0, "lane_change_cooldown must be >= 0");
  check(c.safety_time_gap >= 0, "safety_time_gap must be >= 0");
  check(c.init_min_gap >= c.dims.length,
        "init_min_gap must be at least vehicle_length (placements must clear the collision margin)");
  check(c.speed_dispersion >= 0 && c.speed_dispersion < 1,
        "speed_dispersion must lie in [0, 1)");
  check(c.tx_id >= 0 && c.tx_id < c.total_vehicles(), "tx_id must name an existing vehicle");
  check(c.profile_bin_width > 0, "profile_bin_width must be positive");
  check(c.threads >= 0, "threads must be >= 0");
  for (int id : c.headway_track_ids)
    check(id >= 0 && id < c.total_vehicles(), "headway_track_ids entry " + std::to_string(id) +
                                                  " does not name an existing vehicle");
}

std::string to_canonical_json(const ScenarioConfig& c) {
  json j;
  j["ring_length"] = c.ring_length;
  j["lane_count"] = c.lane_count;
  j["lane_width"] = c.lane_width;
  j["vehicle_length"] = c.dims.length;
  j["vehicle_width"] = c.dims.width;
  j["antenna_offset_long"] = c.dims.antenna_offset_long;
  j["antenna_offset_lat"] = c.dims.antenna_offset_lat;
  for (int l = 0; l < 2; ++l) {
    const std::string p = "lane" + std::to_string(l + 1) + "_";
    const LaneParams& lp = c.lanes[l];
    j[p + "count"] = lp.initial_count;
    j[p + "v_avg"] = lp.v_avg;
    j[p + "v_max"] = lp.v_max;
    j[p + "tau"] = lp.tau;
    j[p + "lambda"] = lp.lambda;
    j[p + "d_p"] = lp.d_p;
    j[p + "d_f"] = lp.d_f;
    j[p + "alpha"] = lp.alpha;
  }
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["r_c"] = c.r_c;
  j["sim_steps"] = c.sim_steps;
  j["warmup_steps"] = c.warmup_steps;
  j["rng_seed"] = c.rng_seed;
  j["velocity_term_mode"] =
      c.velocity_term_mode == VelocityTermMode::as_printed ? "as_printed" : "dimensionless";
  j["init_mode"] = c.init_mode == InitMode::equal_spacing ? "equal_spacing" : "uniform_random";
  j["classifier"] = c.classifier == ClassifierRoute::wedge ? "wedge" : "segment";
  j["lane_changes"] = c.lane_changes_enabled;
  j["hard_brake_guard"] = c.hard_brake_guard;
  j["lane_change_cooldown"] = c.lane_change_cooldown;
  j["safety_time_gap"] = c.safety_time_gap;
  j["init_min_gap"] = c.init_min_gap;
  j["speed_dispersion"] = c.speed_dispersion;
  j["tx_id"] = c.tx_id;
  j["profile_bin_width"] = c.profile_bin_width;
  j["headway_track_ids"] = c.headway_track_ids;
  j["flow_nominal_lane1"] = c.flow_nominal_lane1;
  j["flow_nominal_lane2"] = c.flow_nominal_lane2;
  return j.dump();  // nlohmann objects iterate in sorted key order
}

std::string config_hash(const ScenarioConfig& c) {
  // FNV-1a 64 over the canonical serialization
  const std::string s = to_canonical_json(c);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

double flow_veh_per_hour(int count, double speed, double ring_length) {
  // each vehicle passes a fixed observer speed/ring_length times per second
  return 3600.0 * count * speed / ring_length;
}

}  // namespace vlos
