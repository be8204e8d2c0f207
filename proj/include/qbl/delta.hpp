#pragma once

// Score differences that drive the greedy choice class, and streaming
// detection of phase exits on those differences.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qbl/core.hpp"

namespace qbl {

// Delta = best biased score among one group of actions minus the best among
// the other, with the groups split at `split`:
//   low_minus_high:  max_{a<split} - max_{a>=split}
//   high_minus_low:  max_{a>=split} - max_{a<split}
// Two-action games use split=1, low_minus_high (Delta = score(C) - score(D)).
// The naive duopoly uses split=1, low_minus_high (Q(p0) - max_{k>0} Q(pk));
// the biased duopoly uses split=3, high_minus_low.
struct DeltaSpec {
  enum class Orientation { low_minus_high, high_minus_low };
  std::size_t split = 1;
  Orientation orientation = Orientation::low_minus_high;

  bool operator==(const DeltaSpec&) const = default;
};

inline double compute_delta(const QTable& q, const AgentSpec& spec, const DeltaSpec& ds) {
  constexpr double lowest = std::numeric_limits<double>::lowest();
  double lo = lowest, hi = lowest;
  for (Action a = 0; a < q.size(); ++a) {
    const double s = q[a] + spec.bias * spec.distortion[a];
    if (a < ds.split) {
      if (s > lo) lo = s;
    } else if (s > hi) {
      hi = s;
    }
  }
  return ds.orientation == DeltaSpec::Orientation::low_minus_high ? lo - hi : hi - lo;
}

enum class ExitDirection { to_cooperation, to_defection };

// First period t such that every agent's Delta has the direction's sign
// (strictly) at both t and t+1. Reports t.
class ExitDetector {
 public:
  explicit ExitDetector(ExitDirection dir) : dir_(dir) {}

  void observe(std::size_t t, std::span<const double> deltas) {
    if (exit_) return;
    bool all = true;
    for (double d : deltas) all = all && (dir_ == ExitDirection::to_cooperation ? d > 0.0 : d < 0.0);
    if (all && prev_all_) exit_ = t - 1;
    prev_all_ = all;
  }

  std::optional<std::size_t> exit_time() const { return exit_; }

 private:
  ExitDirection dir_;
  bool prev_all_ = false;
  std::optional<std::size_t> exit_;
};

// First period at which any single agent's Delta has the direction's sign.
class CrossingDetector {
 public:
  explicit CrossingDetector(ExitDirection dir) : dir_(dir) {}

  void observe(std::size_t t, std::span<const double> deltas) {
    if (first_) return;
    for (double d : deltas)
      if (dir_ == ExitDirection::to_cooperation ? d > 0.0 : d < 0.0) {
        first_ = t;
        return;
      }
  }

  std::optional<std::size_t> crossing_time() const { return first_; }

 private:
  ExitDirection dir_;
  std::optional<std::size_t> first_;
};

}  // namespace qbl
