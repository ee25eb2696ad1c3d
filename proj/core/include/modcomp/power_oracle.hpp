#pragma once

// Coupled tensor-power recurrences
//
//   x_{t+1} = x_t + eta A_t x_t^(q-1)
//   y_{t+1} = y_t + eta M A_t y_t^(q-1)
//
// A leader that starts ahead by a factor M^(1/(q-2)) (1 + eps) reaches a
// constant C while the laggard is still near its starting scale.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace modcomp {

struct PowerPairConfig {
  double x0 = 0.01;
  double y0 = 0.005;
  int q = 3;
  double eta = 0.1;
  /// A_t for t = 0, 1, ...; the last entry repeats once the schedule runs out.
  std::vector<double> A_schedule{1.0};
  double M = 1.0;
  double C = 0.5;
  /// Declared lead: the grid check requires x0 >= y0 M^(1/(q-2)) (1 + eps).
  double eps = 0.0;

  double A(std::size_t t) const {
    return A_schedule.empty() ? 0.0 : A_schedule[std::min(t, A_schedule.size() - 1)];
  }
  /// Throws ConfigError unless x0, y0, M > 0, q >= 3 and x0 <= C <= 1.
  void validate() const;
};

struct PowerPairResult {
  std::optional<std::size_t> T_x;  ///< first t with x_t >= C
  double x_at_Tx = 0.0;
  double y_at_Tx = 0.0;
};

/// Iterates the equality forms for at most t_max steps. Throws
/// DivergenceError if either sequence overflows.
PowerPairResult simulate_power_pair(const PowerPairConfig& cfg, std::size_t t_max);

struct PowerGridEntry {
  PowerPairConfig config;
  bool precondition_ok = false;
  PowerPairResult result;
  double ratio = 0.0;  ///< y_{T_x} / x0
  double bound = 0.0;  ///< slack * log(1 / x0)
  bool pass = false;
  std::string note;
};

struct PowerGridReport {
  double slack = 20.0;
  std::size_t t_max = 0;
  std::vector<PowerGridEntry> entries;
  double max_ratio = 0.0;
  bool all_pass = false;
  std::vector<std::size_t> violations;  ///< indices into entries
};

/// Leader's required head start: x0 >= y0 M^(1/(q-2)) (1 + eps) with eps > 0.
bool lead_precondition(const PowerPairConfig& cfg);

/// Checks y_{T_x} <= slack x0 log(1/x0) at every point. Points failing the
/// lead precondition are rejected without simulation and count as violations,
/// as do points that never cross C within t_max.
PowerGridReport lemma_grid_check(const std::vector<PowerPairConfig>& grid, double slack,
                                 std::size_t t_max);

/// q in {3,4}, M in {0.5,1,2}, eps in {0.05,0.2}, x0 in {1e-2,1e-3}; y0 sits
/// exactly at the lead boundary, A_t = 1, eta = 0.1, C = 0.5.
std::vector<PowerPairConfig> default_power_grid();

/// Step budget large enough for every point of default_power_grid().
inline constexpr std::size_t kDefaultPowerTmax = 20'000'000;

std::string to_json(const PowerGridReport& report);

}  // namespace modcomp
