#pragma once

// Bias-grid sweeps, seat-anonymized gain matrices and pure Nash detection
// over bias profiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbl/core.hpp"
#include "qbl/engine.hpp"
#include "qbl/metrics.hpp"

namespace qbl {

struct BiasGrid {
  double increment = 0.02;
  int kappa_min = 0;
  int kappa_max = 4;

  void validate() const {
    if (!(increment > 0.0)) throw usage_error("bias increment must be positive");
    if (kappa_min > kappa_max) throw usage_error("bias grid is empty");
  }
  std::size_t size() const { return static_cast<std::size_t>(kappa_max - kappa_min + 1); }
  int kappa(std::size_t i) const { return kappa_min + static_cast<int>(i); }
  double bias(int kappa) const { return kappa * increment; }
  std::vector<int> kappas() const {
    std::vector<int> k(size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = kappa(i);
    return k;
  }
};

enum class SeedMode { independent, common };

struct GainMatrixMeta {
  std::size_t paths = 0;
  std::size_t horizon = 0;
  std::string environment;
  std::uint64_t master_seed = 0;
  SeedMode seed_mode = SeedMode::independent;
};

// Square matrix over a kappa range. Entry (i, j) is the payoff of the player
// using kappa(i) against an opponent using kappa(j), unless stated otherwise
// (raw seat matrices are indexed by the profile (kappa_1, kappa_2)).
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(std::vector<int> kappas, std::vector<double> values, std::vector<double> std_errors = {})
      : kappas_(std::move(kappas)), v_(std::move(values)), se_(std::move(std_errors)) {
    if (v_.size() != kappas_.size() * kappas_.size()) throw usage_error("gain matrix must be square over its kappa range");
    if (!se_.empty() && se_.size() != v_.size()) throw usage_error("standard-error matrix has the wrong size");
  }

  std::size_t size() const { return kappas_.size(); }
  const std::vector<int>& kappas() const { return kappas_; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * size() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * size() + j]; }
  bool has_std_errors() const { return !se_.empty(); }
  double std_error(std::size_t i, std::size_t j) const { return se_.empty() ? 0.0 : se_[i * size() + j]; }
  const std::vector<double>& values() const { return v_; }
  const std::vector<double>& std_errors() const { return se_; }

  std::size_t index_of(int kappa) const {
    auto it = std::find(kappas_.begin(), kappas_.end(), kappa);
    if (it == kappas_.end()) throw usage_error("kappa " + std::to_string(kappa) + " not in grid");
    return static_cast<std::size_t>(it - kappas_.begin());
  }
  double at_kappa(int k1, int k2) const { return (*this)(index_of(k1), index_of(k2)); }

  // Entrywise a*v + b, errors scaled by |a|.
  GainMatrix affine(double a, double b) const {
    GainMatrix out = *this;
    for (auto& x : out.v_) x = a * x + b;
    for (auto& s : out.se_) s = std::abs(a) * s;
    return out;
  }

  GainMatrixMeta meta;

  bool operator==(const GainMatrix& o) const { return kappas_ == o.kappas_ && v_ == o.v_ && se_ == o.se_; }

 private:
  std::vector<int> kappas_;
  std::vector<double> v_;
  std::vector<double> se_;
};

// v_bar(k, k') = (seat1(k, k') + seat2(k', k)) / 2: the bias-k player's
// payoff against a bias-k' opponent, averaged over both seats.
inline GainMatrix anonymize(const GainMatrix& seat1, const GainMatrix& seat2) {
  if (seat1.kappas() != seat2.kappas()) throw usage_error("seat matrices have mismatched dimensions");
  const std::size_t n = seat1.size();
  std::vector<double> v(n * n), se;
  const bool with_se = seat1.has_std_errors() && seat2.has_std_errors();
  if (with_se) se.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      v[i * n + j] = 0.5 * (seat1(i, j) + seat2(j, i));
      if (with_se) {
        const double a = seat1.std_error(i, j), b = seat2.std_error(j, i);
        // Seats treated as independent; on the diagonal they share runs.
        se[i * n + j] = 0.5 * std::sqrt(a * a + b * b);
      }
    }
  GainMatrix out(seat1.kappas(), std::move(v), std::move(se));
  out.meta = seat1.meta;
  return out;
}

// Twice the root-mean-square cell standard error.
inline double default_tolerance(const GainMatrix& m) {
  if (!m.has_std_errors()) return 0.0;
  double ss = 0.0;
  for (double s : m.std_errors()) ss += s * s;
  return 2.0 * std::sqrt(ss / static_cast<double>(m.std_errors().size()));
}

struct Pressure {
  double player1 = 0.0;
  double player2 = 0.0;
};

struct Profile {
  int kappa1;
  int kappa2;
  bool operator==(const Profile&) const = default;
  auto operator<=>(const Profile&) const = default;
};

namespace detail {
inline double column_max(const GainMatrix& m, std::size_t j) {
  double best = m(0, j);
  for (std::size_t i = 1; i < m.size(); ++i) best = std::max(best, m(i, j));
  return best;
}
inline double row_max(const GainMatrix& m, std::size_t i) {
  double best = m(i, 0);
  for (std::size_t j = 1; j < m.size(); ++j) best = std::max(best, m(i, j));
  return best;
}
}  // namespace detail

// Best unilateral gain for each player at profile (i, j), symmetric game on a
// matrix indexed (own, opponent).
inline Pressure best_response_pressure(const GainMatrix& m, std::size_t i, std::size_t j) {
  return {detail::column_max(m, j) - m(i, j), detail::column_max(m, i) - m(j, i)};
}

inline Pressure best_response_pressure(const GainMatrix& m, Profile p) {
  return best_response_pressure(m, m.index_of(p.kappa1), m.index_of(p.kappa2));
}

// Bimatrix variant: row(i, j) and col(i, j) are players 1 and 2's payoffs at
// profile (i, j).
inline Pressure best_response_pressure(const GainMatrix& row, const GainMatrix& col, std::size_t i, std::size_t j) {
  return {detail::column_max(row, j) - row(i, j), detail::row_max(col, i) - col(i, j)};
}

struct NashEntry {
  Profile profile;
  Pressure pressure;
};

struct NashReport {
  std::vector<NashEntry> equilibria;
  double tolerance = 0.0;

  bool contains(Profile p) const {
    return std::any_of(equilibria.begin(), equilibria.end(), [&](const NashEntry& e) { return e.profile == p; });
  }
  std::vector<Profile> profiles() const {
    std::vector<Profile> out;
    for (const auto& e : equilibria) out.push_back(e.profile);
    return out;
  }
};

inline NashReport pure_nash(const GainMatrix& m, double tolerance) {
  NashReport rep{{}, tolerance};
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      const Pressure p = best_response_pressure(m, i, j);
      if (p.player1 <= tolerance && p.player2 <= tolerance)
        rep.equilibria.push_back({{m.kappas()[i], m.kappas()[j]}, p});
    }
  return rep;
}

inline NashReport pure_nash(const GainMatrix& row, const GainMatrix& col, double tolerance) {
  if (row.kappas() != col.kappas()) throw usage_error("payoff matrices have mismatched dimensions");
  NashReport rep{{}, tolerance};
  for (std::size_t i = 0; i < row.size(); ++i)
    for (std::size_t j = 0; j < row.size(); ++j) {
      const Pressure p = best_response_pressure(row, col, i, j);
      if (p.player1 <= tolerance && p.player2 <= tolerance)
        rep.equilibria.push_back({{row.kappas()[i], row.kappas()[j]}, p});
    }
  return rep;
}

struct SweepResult {
  GainMatrix seat1;  // player 1's payoff at profile (kappa_1, kappa_2)
  GainMatrix seat2;  // player 2's payoff at profile (kappa_1, kappa_2)
  // Pooled joint-profile frequencies per cell, row-major over the grid.
  std::vector<std::vector<double>> profile_frequencies;
  std::vector<double> exit_to_cooperation;  // fraction of paths, per cell

  GainMatrix anonymized() const { return anonymize(seat1, seat2); }
};

// Seed of one grid cell; common mode reuses the master seed everywhere.
inline std::uint64_t cell_seed(std::uint64_t master, int k1, int k2, SeedMode mode) {
  if (mode == SeedMode::common) return master;
  return derive_seed(master, {static_cast<std::uint64_t>(static_cast<std::int64_t>(k1)),
                              static_cast<std::uint64_t>(static_cast<std::int64_t>(k2))});
}

// Runs every ordered bias profile with b_i = kappa_i * increment and
// `base` supplying the remaining parameters (distortion included).
template <Environment Env>
SweepResult sweep_bias_grid(const Env& env, const AgentSpec& base, const BiasGrid& grid, const SimConfig& config,
                            SeedMode seed_mode = SeedMode::independent, std::string environment_name = {}) {
  grid.validate();
  if (env.num_agents() != 2) throw usage_error("bias sweeps need a two-agent environment");
  const std::size_t K = grid.size();
  const std::size_t cells = K * K;
  const std::size_t paths = config.num_paths;

  std::vector<std::vector<AgentSpec>> specs(cells);
  std::vector<SimConfig> configs(cells, config);
  for (std::size_t c = 0; c < cells; ++c) {
    const int k1 = grid.kappa(c / K), k2 = grid.kappa(c % K);
    AgentSpec a1 = base, a2 = base;
    a1.bias = grid.bias(k1);
    a2.bias = grid.bias(k2);
    specs[c] = {a1, a2};
    configs[c].master_seed = cell_seed(config.master_seed, k1, k2, seed_mode);
    configs[c].trace_level = TraceLevel::none;
    detail::validate_run(env, std::span<const AgentSpec>(specs[c]), configs[c]);
  }

  std::vector<PathResult> results(cells * paths);
  parallel_for(cells * paths, config.threads, [&](std::size_t job) {
    const std::size_t c = job / paths, p = job % paths;
    results[job] = run_path(env, std::span<const AgentSpec>(specs[c]), configs[c], p).result;
  });

  std::vector<double> v1(cells), v2(cells), se1(cells), se2(cells), exits(cells);
  std::vector<std::vector<double>> freqs(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    std::span<const PathResult> cell(results.data() + c * paths, paths);
    const auto w = mean_welfare(cell);
    v1[c] = w[0];
    v2[c] = w[1];
    se1[c] = welfare_standard_error(cell, 0);
    se2[c] = welfare_standard_error(cell, 1);
    freqs[c] = profile_frequencies(cell);
    exits[c] = exit_fraction(cell, ExitDirection::to_cooperation);
  }

  GainMatrixMeta meta{paths, config.horizon, std::move(environment_name), config.master_seed, seed_mode};
  SweepResult out;
  out.seat1 = GainMatrix(grid.kappas(), std::move(v1), std::move(se1));
  out.seat2 = GainMatrix(grid.kappas(), std::move(v2), std::move(se2));
  out.seat1.meta = meta;
  out.seat2.meta = meta;
  out.profile_frequencies = std::move(freqs);
  out.exit_to_cooperation = std::move(exits);
  return out;
}

}  // namespace qbl
