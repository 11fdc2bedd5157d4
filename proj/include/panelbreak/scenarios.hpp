#ifndef PANELBREAK_SCENARIOS_HPP
#define PANELBREAK_SCENARIOS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace panelbreak {

// One named Monte Carlo experiment with config-visible parameters and
// thresholds. Runs are pure functions of (name, params, seed).
struct ScenarioResult {
  std::string name;
  bool pass = false;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;  // resolved configuration echo
  std::map<std::string, double> stats;   // summary statistics
  std::vector<std::string> checks;       // human-readable pass/fail lines
  std::vector<double> per_replicate;     // primary per-replicate statistic
  double wall_seconds = 0.0;
};

std::vector<std::string> scenario_names();

std::map<std::string, double> scenario_defaults(const std::string& name);

ScenarioResult run_scenario(const std::string& name,
                            const std::map<std::string, double>& overrides,
                            std::uint64_t seed, int threads = 1);

}  // namespace panelbreak

#endif
