#pragma once

// Derived statistics over path results and traces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qbl/delta.hpp"
#include "qbl/engine.hpp"

namespace qbl {

// Mean per-period reward of each agent over `window`, pooled over paths.
// The window must be the one recorded in the results or the whole horizon.
inline std::vector<double> mean_welfare(std::span<const PathResult> results, Window window) {
  if (window.length() == 0 || window.begin >= window.end) throw usage_error("welfare window is empty");
  if (results.empty()) throw usage_error("no path results");
  const std::size_t n = results.front().reward_total.size();
  std::vector<double> sum(n, 0.0);
  double periods = 0.0;
  for (const auto& r : results) {
    if (window.end > r.horizon) throw usage_error("welfare window exceeds horizon");
    const std::vector<double>* src = nullptr;
    if (window == r.window) src = &r.reward_window;
    else if (window == Window{0, r.horizon}) src = &r.reward_total;
    else throw usage_error("welfare window was not recorded for this run");
    for (std::size_t i = 0; i < n; ++i) sum[i] += (*src)[i];
    periods += static_cast<double>(window.length());
  }
  for (auto& s : sum) s /= periods;
  return sum;
}

inline std::vector<double> mean_welfare(std::span<const PathResult> results) {
  if (results.empty()) throw usage_error("no path results");
  return mean_welfare(results, results.front().window);
}

// Same statistic from full traces, any window.
inline std::vector<double> mean_welfare(std::span<const Trace> traces, Window window) {
  if (window.length() == 0 || window.begin >= window.end) throw usage_error("welfare window is empty");
  if (traces.empty()) throw usage_error("no traces");
  const std::size_t n = traces.front().num_agents();
  std::vector<double> sum(n, 0.0);
  double periods = 0.0;
  for (const auto& tr : traces) {
    if (window.end > tr.size()) throw usage_error("welfare window exceeds trace length");
    for (std::size_t t = window.begin; t < window.end; ++t)
      for (std::size_t i = 0; i < n; ++i) sum[i] += tr.reward(t, i);
    periods += static_cast<double>(window.length());
  }
  for (auto& s : sum) s /= periods;
  return sum;
}

// Average over agents of mean_welfare.
inline double pooled_welfare(std::span<const PathResult> results) {
  auto w = mean_welfare(results);
  double s = 0.0;
  for (double v : w) s += v;
  return s / static_cast<double>(w.size());
}

// Standard error of the pooled mean, treating per-path means as i.i.d. An
// agent index selects one seat; nullopt averages the seats first.
inline double welfare_standard_error(std::span<const PathResult> results, std::optional<std::size_t> agent = {}) {
  const std::size_t n = results.size();
  if (n < 2) return 0.0;
  std::vector<double> m;
  m.reserve(n);
  for (const auto& r : results) {
    if (agent) {
      m.push_back(r.mean_window_reward(*agent));
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < r.reward_window.size(); ++i) s += r.mean_window_reward(i);
      m.push_back(s / static_cast<double>(r.reward_window.size()));
    }
  }
  double mean = 0.0;
  for (double v : m) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : m) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

// Joint-profile frequencies over the whole horizon, pooled over paths. For
// two agents, index = a1 * A + a2 (so CC, CD, DC, DD in the PD).
inline std::vector<double> profile_frequencies(std::span<const PathResult> results) {
  if (results.empty()) throw usage_error("no path results");
  std::vector<double> f(results.front().profile_counts.size(), 0.0);
  double total = 0.0;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < f.size(); ++k) f[k] += static_cast<double>(r.profile_counts[k]);
    total += static_cast<double>(r.horizon);
  }
  for (auto& v : f) v /= total;
  return f;
}

inline std::optional<std::size_t> exit_time(const Trace& trace, ExitDirection dir) {
  ExitDetector det(dir);
  for (std::size_t t = 0; t < trace.size() && !det.exit_time(); ++t) det.observe(t, trace.deltas(t));
  return det.exit_time();
}

inline std::optional<std::size_t> first_crossing_time(const Trace& trace, ExitDirection dir) {
  CrossingDetector det(dir);
  for (std::size_t t = 0; t < trace.size() && !det.crossing_time(); ++t) det.observe(t, trace.deltas(t));
  return det.crossing_time();
}

inline std::optional<std::size_t> recorded_exit(const PathResult& r, ExitDirection dir) {
  return dir == ExitDirection::to_cooperation ? r.exit_to_cooperation : r.exit_to_defection;
}

// Fraction of paths with a finite exit time; censored paths count as no exit.
inline double exit_fraction(std::span<const PathResult> results, ExitDirection dir) {
  if (results.empty()) return 0.0;
  std::size_t k = 0;
  for (const auto& r : results) k += recorded_exit(r, dir).has_value();
  return static_cast<double>(k) / static_cast<double>(results.size());
}

struct HistogramSpec {
  double omega = 0.005;
  int k_min = -200;
  int k_max = 199;
  std::size_t min_count = 500;

  void validate() const {
    if (!(omega > 0.0)) throw usage_error("bin width must be positive");
    if (min_count < 1) throw usage_error("bin count threshold must be at least 1");
    if (k_min > k_max) throw usage_error("empty bin range");
  }
};

struct FrequencyBin {
  int k;
  double lower;
  double upper;
  std::size_t count;
  double frequency;  // share of periods in the bin with Delta_2 > 0
};

// Pr(Delta_2 > 0 | Delta_1 in (k*omega, (k+1)*omega)), bins below the count
// threshold dropped.
inline std::vector<FrequencyBin> conditional_frequency_curve(std::span<const Trace> traces, const HistogramSpec& spec) {
  spec.validate();
  std::map<int, std::pair<std::size_t, std::size_t>> bins;  // k -> (count, positives)
  for (const auto& tr : traces) {
    if (tr.num_agents() != 2) throw usage_error("conditional frequency curve needs two-agent traces");
    for (std::size_t t = 0; t < tr.size(); ++t) {
      const double d1 = tr.delta(t, 0);
      const double scaled = d1 / spec.omega;
      const double fl = std::floor(scaled);
      if (fl == scaled) continue;  // open intervals
      if (fl < spec.k_min || fl > spec.k_max) continue;
      auto& b = bins[static_cast<int>(fl)];
      ++b.first;
      b.second += tr.delta(t, 1) > 0.0;
    }
  }
  std::vector<FrequencyBin> out;
  for (const auto& [k, b] : bins) {
    if (b.first < spec.min_count) continue;
    out.push_back({k, k * spec.omega, (k + 1) * spec.omega, b.first,
                   static_cast<double>(b.second) / static_cast<double>(b.first)});
  }
  return out;
}

struct DurationSummary {
  double median;   // equals the horizon when censored
  bool censored;   // median falls among paths without an exit
};

// Median of exit times with paths lacking an exit ordered as +infinity.
inline DurationSummary median_duration(std::span<const std::optional<std::size_t>> times, std::size_t horizon) {
  if (times.empty()) throw usage_error("no exit times");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v;
  v.reserve(times.size());
  for (const auto& t : times) v.push_back(t ? static_cast<double>(*t) : inf);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double m = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (std::isinf(m)) return {static_cast<double>(horizon), true};
  return {m, false};
}

}  // namespace qbl
