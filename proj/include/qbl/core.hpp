#pragma once

// Learning kernel: Q-tables, the asynchronous Q-update and the biased
// epsilon-greedy policy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qbl {

using Action = std::size_t;

class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ties in the biased score go to the lowest action index (cooperation sits at
// index 0 in every two-action environment).
inline constexpr bool kTiesFavorLowestIndex = true;

class QTable {
 public:
  QTable() = default;
  explicit QTable(std::vector<double> values) : values_(std::move(values)) {}
  QTable(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  double operator[](Action a) const { return values_[a]; }
  double& operator[](Action a) { return values_[a]; }
  std::span<const double> values() const { return values_; }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  bool operator==(const QTable&) const = default;

 private:
  std::vector<double> values_;
};

struct AgentSpec {
  double alpha = 0.1;
  double epsilon = 0.1;
  double delta = 0.95;
  double bias = 0.0;
  std::vector<double> distortion;  // one weight per action

  void validate(std::size_t num_actions) const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw invalid_parameter("alpha must lie in (0,1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw invalid_parameter("epsilon must lie in [0,1]");
    if (!(delta >= 0.0 && delta < 1.0)) throw invalid_parameter("delta must lie in [0,1)");
    if (!std::isfinite(bias)) throw invalid_parameter("bias must be finite");
    if (distortion.size() != num_actions)
      throw invalid_parameter("distortion length " + std::to_string(distortion.size()) +
                              " does not match action count " + std::to_string(num_actions));
  }
};

// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(master);
  for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags. Agents use their index; the environment gets its own tag.
inline constexpr std::uint64_t kEnvironmentStream = 0xe17e17e1ULL;

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t path_index, std::uint64_t stream)
      : master_seed_(master_seed),
        path_index_(path_index),
        gen_(derive_seed(master_seed, {path_index, stream})) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t path_index() const { return path_index_; }

  // Uniform on [0,1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}; n > 0.
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }

  bool operator==(const RngStream&) const = default;

 private:
  std::uint64_t master_seed_;
  std::uint64_t path_index_;
  std::mt19937_64 gen_;
};

// Asynchronous update: only the played entry moves, toward
// (1-delta)*reward + delta*max Q taken over the pre-update table.
inline void q_update_inplace(QTable& q, Action action, double reward, double alpha, double delta) {
  if (action >= q.size())
    throw usage_error("action index " + std::to_string(action) + " out of range for table of size " +
                      std::to_string(q.size()));
  const double target = (1.0 - delta) * reward + delta * q.max();
  q[action] = (1.0 - alpha) * q[action] + alpha * target;
}

inline QTable q_update(QTable q, Action action, double reward, double alpha, double delta) {
  q_update_inplace(q, action, reward, alpha, delta);
  return q;
}

inline std::vector<double> biased_score(const QTable& q, const AgentSpec& spec) {
  std::vector<double> s(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) s[a] = q[a] + spec.bias * spec.distortion[a];
  return s;
}

// First maximal index; the score is recomputed on the fly to avoid allocation.
inline Action greedy_action(const QTable& q, const AgentSpec& spec) {
  Action best = 0;
  double best_score = q[0] + spec.bias * spec.distortion[0];
  for (Action a = 1; a < q.size(); ++a) {
    const double s = q[a] + spec.bias * spec.distortion[a];
    if (s > best_score) {
      best = a;
      best_score = s;
    }
  }
  return best;
}

// One draw decides experimentation; an experiment draws uniformly over all
// actions, greedy one included.
inline Action select_action(const QTable& q, const AgentSpec& spec, RngStream& rng) {
  if (spec.epsilon > 0.0 && rng.uniform() < spec.epsilon) return rng.index(q.size());
  return greedy_action(q, spec);
}

}  // namespace qbl
