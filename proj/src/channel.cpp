#include "vlos/channel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vlos {

using nlohmann::json;

double path_loss_mean(double d, const PathLossModel& m) {
  if (d < m.d0)
    throw std::domain_error("path_loss_mean: d = " + std::to_string(d) +
                            " m is below the model reference distance d0 = " +
                            std::to_string(m.d0) + " m (" + m.name + ")");
  if (!m.dual_slope() || d <= m.db) return m.pl0 + 10.0 * m.n1 * std::log10(d / m.d0);
  // second slope continues from the value at the breakpoint, so the curve is
  // continuous there by construction
  return m.pl0 + 10.0 * m.n1 * std::log10(m.db / m.d0) + 10.0 * m.n2 * std::log10(d / m.db);
}

double rx_power_mean(double d, const PathLossModel& m, const LinkBudget& b) {
  return b.pw_tx - path_loss_mean(d, m);
}

double q_function(double x) {
  // Q(x) = 0.5 * erfc(x / sqrt(2)); erfc keeps precision in the far tail
  return 0.5 * std::erfc(x * M_SQRT1_2);
}

double prob_rx_above(double d, const PathLossModel& m, const LinkBudget& b) {
  const double mu = rx_power_mean(d, m, b);
  if (m.sigma == 0.0) {
    // degenerate shadowing: a hard threshold; on the boundary report the
    // symmetric limit 1/2
    if (mu > b.csth) return 1.0;
    if (mu < b.csth) return 0.0;
    return 0.5;
  }
  // P[mu + N(0, sigma) > csth] = Q((csth - mu) / sigma)
  return q_function((b.csth - mu) / m.sigma);
}

double joint_prp(double d, const PathLossModel& los, const PathLossModel& olos,
                 const DistanceProfile& profile, const LinkBudget& b) {
  const int bin = profile.bin_of(d);
  if (!profile.defined(bin))
    throw std::invalid_argument("joint_prp: no sight observations in the distance bin around " +
                                std::to_string(d) + " m");
  const double w = profile.pr_los(bin);
  return w * prob_rx_above(d, los, b) + (1.0 - w) * prob_rx_above(d, olos, b);
}

double ShadowSampler::draw(double sigma) {
  if (sigma < 0) throw std::invalid_argument("ShadowSampler: sigma must be >= 0");
  if (has_spare_) {
    has_spare_ = false;
    return spare_ * sigma;
  }
  // Box-Muller on two 53-bit uniforms; u1 shifted away from zero
  const double u1 = ((eng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = (eng_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double z0 = r * std::cos(2.0 * M_PI * u2);
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return z0 * sigma;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw ConfigError(origin + ": " + msg);
}

}  // namespace

ChannelConfig models_from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) fail(origin, "top level must be a JSON object");

  ChannelConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "pw_tx_dbm") cfg.budget.pw_tx = value.get<double>();
    else if (key == "csth_dbm") cfg.budget.csth = value.get<double>();
    else if (key == "d_min") cfg.d_min = value.get<double>();
    else if (key == "d_max") cfg.d_max = value.get<double>();
    else if (key == "d_step") cfg.d_step = value.get<double>();
    else if (key == "joint_los") cfg.joint_los = value.get<std::string>();
    else if (key == "joint_olos") cfg.joint_olos = value.get<std::string>();
    else if (key == "models") {
      if (!value.is_array()) fail(origin, "'models' must be an array");
      for (const auto& mj : value) {
        if (!mj.is_object() || !mj.contains("name")) fail(origin, "each model needs a 'name'");
        PathLossModel m;
        m.name = mj["name"].get<std::string>();
        const std::string at = origin + " model '" + m.name + "'";
        for (const auto& [mk, mv] : mj.items()) {
          if (mk == "name") continue;
          else if (mk == "pl0_db") m.pl0 = mv.get<double>();
          else if (mk == "n1") m.n1 = mv.get<double>();
          else if (mk == "n2") m.n2 = mv.get<double>();
          else if (mk == "d0") m.d0 = mv.get<double>();
          else if (mk == "db") m.db = mv.get<double>();
          else if (mk == "sigma_db") m.sigma = mv.get<double>();
          else fail(at, "unknown key '" + mk + "'");
        }
        if (m.d0 <= 0) fail(at, "d0 must be positive");
        if (m.sigma < 0) fail(at, "sigma_db must be >= 0");
        if (std::isfinite(m.db) && m.db < m.d0) fail(at, "db must be >= d0");
        cfg.models.push_back(std::move(m));
      }
    } else fail(origin, "unknown key '" + key + "'");
  }
  if (cfg.models.empty()) fail(origin, "at least one model is required");
  for (size_t i = 0; i < cfg.models.size(); ++i)
    for (size_t k = i + 1; k < cfg.models.size(); ++k)
      if (cfg.models[i].name == cfg.models[k].name)
        fail(origin, "duplicate model name '" + cfg.models[i].name + "'");
  if (!cfg.joint_los.empty() != !cfg.joint_olos.empty())
    fail(origin, "joint_los and joint_olos must be set together");
  if (!cfg.joint_los.empty()) {
    if (!find_model(cfg, cfg.joint_los)) fail(origin, "joint_los names unknown model '" + cfg.joint_los + "'");
    if (!find_model(cfg, cfg.joint_olos)) fail(origin, "joint_olos names unknown model '" + cfg.joint_olos + "'");
  }
  if (!(cfg.d_step > 0) || !(cfg.d_max >= cfg.d_min)) fail(origin, "sweep grid must have d_step > 0 and d_max >= d_min");
  for (const PathLossModel& m : cfg.models)
    if (cfg.d_min < m.d0)
      fail(origin, "sweep d_min = " + std::to_string(cfg.d_min) + " is below d0 of model '" +
                       m.name + "'");
  return cfg;
}

ChannelConfig load_models(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open models config");
  std::stringstream ss;
  ss << in.rdbuf();
  return models_from_json_text(ss.str(), path);
}

const PathLossModel* find_model(const ChannelConfig& cfg, const std::string& name) {
  for (const auto& m : cfg.models)
    if (m.name == name) return &m;
  return nullptr;
}

std::vector<double> sweep_grid(const ChannelConfig& cfg) {
  std::vector<double> g;
  for (std::int64_t i = 0;; ++i) {
    const double d = cfg.d_min + i * cfg.d_step;
    if (d > cfg.d_max + 1e-9) break;
    g.push_back(std::min(d, cfg.d_max));
  }
  return g;
}

std::vector<CurveRow> curve_sweep(const ChannelConfig& cfg, const DistanceProfile* profile) {
  std::vector<CurveRow> rows;
  const std::vector<double> grid = sweep_grid(cfg);
  for (const PathLossModel& m : cfg.models)
    for (double d : grid)
      rows.push_back({d, m.name, rx_power_mean(d, m, cfg.budget), prob_rx_above(d, m, cfg.budget)});
  if (profile && !cfg.joint_los.empty()) {
    const PathLossModel* los = find_model(cfg, cfg.joint_los);
    const PathLossModel* olos = find_model(cfg, cfg.joint_olos);
    for (double d : grid) {
      // skip grid points the run produced no sight observations for; the
      // direct joint_prp call still reports them as errors
      if (!profile->defined(profile->bin_of(d))) continue;
      rows.push_back({d, "joint", std::nan(""),
                      joint_prp(d, *los, *olos, *profile, cfg.budget)});
    }
  }
  return rows;
}

}  // namespace vlos
