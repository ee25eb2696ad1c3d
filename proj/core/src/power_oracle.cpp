#include "modcomp/power_oracle.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "modcomp/errors.hpp"

namespace modcomp {
namespace {

double power_term(double v, int q) {
  double out = 1.0;
  for (int i = 0; i < q - 1; ++i) out *= v;
  return out;
}

}  // namespace

void PowerPairConfig::validate() const {
  if (!(x0 > 0.0 && y0 > 0.0)) throw ConfigError("power pair: x0 and y0 must be positive");
  if (!(M > 0.0)) throw ConfigError("power pair: M must be positive");
  if (q < 3) throw ConfigError("power pair: q must be at least 3");
  if (!(eta >= 0.0)) throw ConfigError("power pair: eta must be non-negative");
  if (!(C >= x0 && C <= 1.0)) throw ConfigError("power pair: require x0 <= C <= 1");
}

PowerPairResult simulate_power_pair(const PowerPairConfig& cfg, std::size_t t_max) {
  cfg.validate();
  if (t_max < 1) throw ConfigError("power pair: t_max must be at least 1");
  PowerPairResult res;
  double x = cfg.x0;
  double y = cfg.y0;
  for (std::size_t t = 0; t <= t_max; ++t) {
    if (x >= cfg.C) {
      res.T_x = t;
      res.x_at_Tx = x;
      res.y_at_Tx = y;
      return res;
    }
    if (t == t_max) break;
    const double a = cfg.A(t);
    x += cfg.eta * a * power_term(x, cfg.q);
    y += cfg.eta * cfg.M * a * power_term(y, cfg.q);
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw DivergenceError(t + 1, "power pair overflowed");
    }
  }
  res.x_at_Tx = x;
  res.y_at_Tx = y;
  return res;
}

bool lead_precondition(const PowerPairConfig& cfg) {
  if (!(cfg.eps > 0.0)) return false;
  const double need = cfg.y0 * std::pow(cfg.M, 1.0 / (cfg.q - 2)) * (1.0 + cfg.eps);
  // Relative tolerance covers y0 constructed exactly at the boundary.
  return cfg.x0 >= need * (1.0 - 1e-12);
}

PowerGridReport lemma_grid_check(const std::vector<PowerPairConfig>& grid, double slack,
                                 std::size_t t_max) {
  if (!(slack > 0.0)) throw ConfigError("lemma_grid_check: slack must be positive");
  PowerGridReport rep;
  rep.slack = slack;
  rep.t_max = t_max;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    PowerGridEntry e;
    e.config = grid[i];
    e.precondition_ok = lead_precondition(e.config);
    if (!e.precondition_ok) {
      e.note = "rejected: x0 < y0 M^(1/(q-2)) (1 + eps) with eps > 0 required";
      rep.violations.push_back(i);
      rep.entries.push_back(std::move(e));
      continue;
    }
    e.result = simulate_power_pair(e.config, t_max);
    e.ratio = e.result.y_at_Tx / e.config.x0;
    e.bound = slack * std::log(1.0 / e.config.x0);
    if (!e.result.T_x) {
      e.note = "leader did not reach C within t_max";
    } else {
      e.pass = e.ratio <= e.bound;
      rep.max_ratio = std::max(rep.max_ratio, e.ratio);
      if (!e.pass) e.note = "laggard exceeded slack * x0 * log(1/x0)";
    }
    if (!e.pass) rep.violations.push_back(i);
    rep.entries.push_back(std::move(e));
  }
  rep.all_pass = rep.violations.empty() && !rep.entries.empty();
  return rep;
}

std::vector<PowerPairConfig> default_power_grid() {
  std::vector<PowerPairConfig> grid;
  for (int q : {3, 4}) {
    for (double M : {0.5, 1.0, 2.0}) {
      for (double eps : {0.05, 0.2}) {
        for (double x0 : {1e-2, 1e-3}) {
          PowerPairConfig c;
          c.q = q;
          c.M = M;
          c.eps = eps;
          c.x0 = x0;
          c.y0 = x0 / (std::pow(M, 1.0 / (q - 2)) * (1.0 + eps));
          c.eta = 0.1;
          c.A_schedule = {1.0};
          c.C = 0.5;
          grid.push_back(c);
        }
      }
    }
  }
  return grid;
}

std::string to_json(const PowerGridReport& report) {
  using nlohmann::json;
  json entries = json::array();
  for (const auto& e : report.entries) {
    json j;
    j["q"] = e.config.q;
    j["M"] = e.config.M;
    j["eps"] = e.config.eps;
    j["x0"] = e.config.x0;
    j["y0"] = e.config.y0;
    j["eta"] = e.config.eta;
    j["C"] = e.config.C;
    j["precondition_ok"] = e.precondition_ok;
    j["T_x"] = e.result.T_x ? json(*e.result.T_x) : json(nullptr);
    j["y_at_Tx"] = e.result.y_at_Tx;
    j["ratio"] = e.ratio;
    j["bound"] = e.bound;
    j["pass"] = e.pass;
    if (!e.note.empty()) j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  json out;
  out["slack"] = report.slack;
  out["t_max"] = report.t_max;
  out["bound_form"] = "y_Tx <= slack * x0 * log(1/x0)";
  out["max_ratio"] = report.max_ratio;
  out["all_pass"] = report.all_pass;
  out["violations"] = report.violations;
  out["entries"] = std::move(entries);
  return out.dump(2);
}

}  // namespace modcomp
