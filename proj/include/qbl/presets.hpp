#pragma once

// Named run configurations. Presets are JSON documents; preset(name) parses
// one through the same path as a user config file.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbl/config.hpp"

namespace qbl {

struct PresetEntry {
  std::string_view name;
  std::string_view summary;
  std::string_view json;
};

namespace detail {

// clang-format off
inline constexpr PresetEntry kPresets[] = {
// ---- decision problem --------------------------------------------------
{"qtrap-welfare", "Decision automaton welfare grid, (y,x)=(-0.5,1)", R"({
  "experiment": "grid",
  "environment": {"kind": "decision", "x": 1.0, "y": -0.5, "initial_state": 2},
  "agents": {"alpha": [0.1, 0.3, 0.5], "epsilon": [0.1, 0.2, 0.3, 0.4], "delta": 0.95, "initial_q": [0.9, 1.0]},
  "simulation": {"horizon": 100000, "paths": 30, "window_fraction": 0.8}
})"},
{"qtrap-welfare-y05", "Decision automaton welfare grid, (y,x)=(0.5,1)", R"({
  "experiment": "grid",
  "environment": {"kind": "decision", "x": 1.0, "y": 0.5, "initial_state": 2},
  "agents": {"alpha": [0.1, 0.3, 0.5], "epsilon": [0.1, 0.2, 0.3, 0.4], "delta": 0.95, "initial_q": [0.9, 1.0]},
  "simulation": {"horizon": 100000, "paths": 30, "window_fraction": 0.8}
})"},
{"qtrap-welfare-x25", "Decision automaton welfare grid, (y,x)=(0.5,2.5)", R"({
  "experiment": "grid",
  "environment": {"kind": "decision", "x": 2.5, "y": 0.5, "initial_state": 2},
  "agents": {"alpha": [0.1, 0.3, 0.5], "epsilon": [0.1, 0.2, 0.3, 0.4], "delta": 0.95, "initial_q": [0.9, 1.0]},
  "simulation": {"horizon": 100000, "paths": 30, "window_fraction": 0.8}
})"},
{"fig1-qtrap-trace", "Decision automaton path, alpha=0.1, epsilon=0.1, favorable start", R"({
  "environment": {"kind": "decision", "x": 1.0, "y": -0.5, "initial_state": 1},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
{"fig3-qtrap-trace", "Decision automaton path, alpha=0.3, epsilon=0.3, favorable start", R"({
  "environment": {"kind": "decision", "x": 1.0, "y": -0.5, "initial_state": 1},
  "agents": {"alpha": 0.3, "epsilon": 0.3, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
{"fig20-qtrap-trace", "Decision automaton path, x=2.5, y=0.5, favorable start", R"({
  "environment": {"kind": "decision", "x": 2.5, "y": 0.5, "initial_state": 1},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
// ---- deterministic prisoner's dilemma ------------------------------------
{"pd-welfare", "PD welfare and exit grid, 3 alpha x 8 epsilon", R"({
  "experiment": "grid",
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": [0.1, 0.3, 0.5], "epsilon": [0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2],
             "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 10000, "paths": 90}
})"},
{"pd-bias", "PD bias sweep, alpha=0.5, kappa 0..4", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": 0, "kappa_max": 4}},
  "simulation": {"horizon": 10000, "paths": 90}
})"},
{"pd-bias-long", "PD bias sweep, alpha=0.5, 100k periods, kappa -1..4", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": -1, "kappa_max": 4}},
  "simulation": {"horizon": 100000, "paths": 90}
})"},
{"pd-bias-alpha02", "PD bias sweep, alpha=0.2, 100k periods, kappa 0..4", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.2, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": 0, "kappa_max": 4}},
  "simulation": {"horizon": 100000, "paths": 90}
})"},
{"pd-bias-alpha01", "PD bias sweep, alpha=0.1, 100k periods, kappa -1..4", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": -1, "kappa_max": 4}},
  "simulation": {"horizon": 100000, "paths": 90},
  "output": {"precision": 3}
})"},
{"pd-bias-y05", "PD bias sweep, y=0.5, 10k periods, kappa -1..3", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": -1, "kappa_max": 3}},
  "simulation": {"horizon": 10000, "paths": 90}
})"},
{"pd-bias-y05-long", "PD bias sweep, y=0.5, 100k periods, kappa -1..3", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": -1, "kappa_max": 3}},
  "simulation": {"horizon": 100000, "paths": 90}
})"},
{"fig4-pd-trace", "PD path, alpha=0.5, epsilon=0.1, unfavorable start", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
{"fig8-pd-anatomy-trace", "PD path from asymmetric start (Delta 0.3 and -0.01)", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "initial_q": [[1.4, 1.1], [1.31, 1.32]]},
  "simulation": {"horizon": 2000, "paths": 1, "trace": "full"}
})"},
{"fig9-pd-bias-trace", "PD path at bias profile (2,2), increment 0.02", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": -0.5},
  "agents": {"alpha": 0.5, "epsilon": 0.1, "delta": 0.95, "bias": 0.04, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
// ---- stochastic prisoner's dilemma ---------------------------------------
{"pd-stochastic", "Stochastic PD, correlated shocks, profile shares by epsilon", R"({
  "experiment": "grid",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "correlated"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1, 0.15, 0.2, 0.25], "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 200000, "paths": 10}
})"},
{"pd-stochastic-independent", "Stochastic PD, independent shocks, profile shares by epsilon", R"({
  "experiment": "grid",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "independent"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1, 0.15, 0.2, 0.25], "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 200000, "paths": 10}
})"},
{"pd-stochastic-durations", "Median phase durations, correlated shocks", R"({
  "experiment": "durations",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "correlated"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1, 0.15, 0.2, 0.25], "delta": 0.95},
  "simulation": {"horizon": 10000, "paths": 25},
  "analysis": {"durations": {"favorable_q": [1.5, 1.4], "unfavorable_q": [1.2, 1.25]}}
})"},
{"pd-stochastic-durations-independent", "Median phase durations, independent shocks", R"({
  "experiment": "durations",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "independent"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1, 0.15, 0.2, 0.25], "delta": 0.95},
  "simulation": {"horizon": 10000, "paths": 25},
  "analysis": {"durations": {"favorable_q": [1.5, 1.4], "unfavorable_q": [1.2, 1.25]}}
})"},
{"pd-stochastic-conditional", "Pr(Delta_2 > 0 | Delta_1), correlated shocks", R"({
  "experiment": "conditional-curve",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "correlated"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1], "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 200000, "paths": 1},
  "analysis": {"histogram": {"omega": 0.005, "k_min": -200, "k_max": 199, "min_count": 500}}
})"},
{"pd-stochastic-conditional-independent", "Pr(Delta_2 > 0 | Delta_1), independent shocks", R"({
  "experiment": "conditional-curve",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "independent"},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1], "delta": 0.95, "initial_q": [0.95, 1.0]},
  "simulation": {"horizon": 200000, "paths": 1},
  "analysis": {"histogram": {"omega": 0.005, "k_min": -200, "k_max": 199, "min_count": 500}}
})"},
{"pd-deterministic-conditional", "Pr(Delta_2 > 0 | Delta_1), deterministic payoffs, favorable start", R"({
  "experiment": "conditional-curve",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0},
  "agents": {"alpha": 0.1, "epsilon": [0.05, 0.1], "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 200000, "paths": 1},
  "analysis": {"histogram": {"omega": 0.005, "k_min": -200, "k_max": 199, "min_count": 500}}
})"},
{"pd-stochastic-bias", "Stochastic PD bias sweep, correlated shocks, kappa 0..6", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "correlated"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": 0, "kappa_max": 6}},
  "simulation": {"horizon": 10000, "paths": 90}
})"},
{"pd-stochastic-bias-independent", "Stochastic PD bias sweep, independent shocks, kappa 0..6", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "independent"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [0.95, 1.0],
             "bias_grid": {"increment": 0.02, "kappa_min": 0, "kappa_max": 6}},
  "simulation": {"horizon": 10000, "paths": 90}
})"},
{"fig11-pd-deterministic-trace", "PD path, deterministic payoffs, y=0, favorable start", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
{"fig12-pd-correlated-trace", "PD path, correlated shocks, favorable start", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "correlated"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
{"fig13-pd-independent-trace", "PD path, independent shocks, favorable start", R"({
  "environment": {"kind": "pd", "x": 2.5, "y": 0.0, "channel": "stochastic", "V": 5.0, "correlation": "independent"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [1.5, 1.4]},
  "simulation": {"horizon": 10000, "paths": 1, "trace": "full"}
})"},
// ---- duopoly -------------------------------------------------------------
{"duopoly-naive", "Logit duopoly, naive learners", R"({
  "environment": {"kind": "duopoly"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8]},
  "simulation": {"horizon": 100000, "paths": 8}
})"},
{"duopoly-bias", "Logit duopoly bias sweep, increment 0.01, kappa 0..5", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "duopoly"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "distortion": "own-price-profit",
             "initial_q": [2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8],
             "bias_grid": {"increment": 0.01, "kappa_min": 0, "kappa_max": 5}},
  "simulation": {"horizon": 100000, "paths": 8}
})"},
{"duopoly-bias-last80k", "Logit duopoly bias sweep, welfare over the last 80% of periods", R"({
  "experiment": "bias-sweep",
  "environment": {"kind": "duopoly"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "distortion": "own-price-profit",
             "initial_q": [2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8],
             "bias_grid": {"increment": 0.01, "kappa_min": 0, "kappa_max": 5}},
  "simulation": {"horizon": 100000, "paths": 8, "window_fraction": 0.8}
})"},
{"fig16-duopoly-naive-trace", "Logit duopoly path, naive learners", R"({
  "environment": {"kind": "duopoly"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "initial_q": [2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8]},
  "simulation": {"horizon": 100000, "paths": 1, "trace": "full"},
  "output": {"stride": 10}
})"},
{"fig18-duopoly-bias-trace", "Logit duopoly path at bias profile (3,3), increment 0.01", R"({
  "environment": {"kind": "duopoly"},
  "agents": {"alpha": 0.1, "epsilon": 0.1, "delta": 0.95, "bias": 0.03, "distortion": "own-price-profit",
             "initial_q": [2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8]},
  "simulation": {"horizon": 100000, "paths": 1, "trace": "full"},
  "output": {"stride": 10}
})"},
};
// clang-format on

}  // namespace detail

inline std::span<const PresetEntry> preset_entries() { return detail::kPresets; }

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : detail::kPresets) out.emplace_back(p.name);
  return out;
}

inline bool has_preset(std::string_view name) {
  for (const auto& p : detail::kPresets)
    if (p.name == name) return true;
  return false;
}

inline RunConfig preset(std::string_view name) {
  for (const auto& p : detail::kPresets) {
    if (p.name != name) continue;
    RunConfig c = parse_run_config(std::string(p.json));
    c.name = std::string(p.name);
    if (c.description.empty()) c.description = std::string(p.summary);
    if (c.output.directory == "out") c.output.directory = "out/" + c.name;
    return c;
  }
  throw config_error("unknown preset '" + std::string(name) + "' (see `qbl presets`)");
}

}  // namespace qbl
