#pragma once

// Payoff and state environments: the single-agent decision automaton, the
// repeated prisoner's dilemma (deterministic or stochastic payoffs) and the
// logit price duopoly.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qbl/core.hpp"

namespace qbl {

template <class E>
concept Environment = requires(E env, const E cenv, std::span<const Action> actions, RngStream& rng,
                               std::span<double> rewards) {
  { cenv.num_agents() } -> std::convertible_to<std::size_t>;
  { cenv.num_actions() } -> std::convertible_to<std::size_t>;
  { cenv.reward_range() } -> std::convertible_to<std::pair<double, double>>;
  env.step(actions, rng, rewards);
};

// ---------------------------------------------------------------------------
// Decision automaton. Action index 0 is "action 1", index 1 is "action 2";
// state index 0 is the favorable state.

class DecisionAutomatonEnv {
 public:
  static constexpr std::size_t kActions = 2;
  static constexpr std::size_t kStates = 2;

  // switch_prob[a][s]: probability of leaving state s when a is played.
  using Transitions = std::array<std::array<double, kStates>, kActions>;
  using Payoffs = std::array<std::array<double, kStates>, kActions>;

  static constexpr Transitions kDefaultTransitions{{{0.01, 0.05}, {0.05, 0.0}}};

  DecisionAutomatonEnv(double y, double x, std::size_t initial_state = 1,
                       Transitions switch_prob = kDefaultTransitions)
      : switch_prob_(switch_prob), payoff_{{{2.0, y}, {x, 1.0}}}, state_(initial_state) {
    for (const auto& row : switch_prob_)
      for (double p : row)
        if (!(p >= 0.0 && p <= 1.0)) throw invalid_parameter("transition probabilities must lie in [0,1]");
    if (initial_state >= kStates) throw invalid_parameter("initial state must be 0 or 1");
  }

  std::size_t num_agents() const { return 1; }
  std::size_t num_actions() const { return kActions; }

  std::pair<double, double> reward_range() const {
    double lo = payoff_[0][0], hi = payoff_[0][0];
    for (const auto& row : payoff_)
      for (double v : row) lo = std::min(lo, v), hi = std::max(hi, v);
    return {lo, hi};
  }

  double payoff(Action a, std::size_t state) const { return payoff_[a][state]; }
  // Probability of moving from `from` to `to` under action a.
  double transition(Action a, std::size_t from, std::size_t to) const {
    return from == to ? 1.0 - switch_prob_[a][from] : switch_prob_[a][from];
  }

  // Returns the reward of the current state, then moves the hidden state.
  double decision_step(Action a, RngStream& rng) {
    if (a >= kActions) throw usage_error("decision automaton action out of range");
    const double r = payoff_[a][state_];
    if (rng.uniform() < switch_prob_[a][state_]) state_ = 1 - state_;
    return r;
  }

  void step(std::span<const Action> actions, RngStream& rng, std::span<double> rewards) {
    rewards[0] = decision_step(actions[0], rng);
  }

  // Diagnostic only; never handed to agents.
  std::size_t hidden_state() const { return state_; }

 private:
  Transitions switch_prob_;
  Payoffs payoff_;
  std::size_t state_;
};

// ---------------------------------------------------------------------------
// Prisoner's dilemma. C = 0, D = 1.

inline constexpr Action kCooperate = 0;
inline constexpr Action kDefect = 1;

enum class PayoffChannel { deterministic, stochastic };
enum class ShockCorrelation { correlated, independent };

struct PDGame {
  double x = 2.5;
  double y = -0.5;
  PayoffChannel channel = PayoffChannel::deterministic;

  // Row player's payoff.
  double payoff(Action own, Action other) const {
    if (own == kCooperate) return other == kCooperate ? 2.0 : y;
    return other == kCooperate ? x : 1.0;
  }
};

struct StochasticChannel {
  double V = 5.0;
  double L = 2.5;
  std::array<double, 3> p{0.2, 0.5, 0.9};  // by number of cooperators
  ShockCorrelation mode = ShockCorrelation::correlated;

  void validate() const {
    if (!(V > 0.0)) throw invalid_parameter("V must be positive");
    if (!(0.0 <= p[0] && p[0] <= p[1] && p[1] <= p[2] && p[2] <= 1.0))
      throw invalid_parameter("need 0 <= p0 <= p1 <= p2 <= 1");
  }

  double expected_gain(std::size_t cooperators, bool own_cooperates) const {
    return p[cooperators] * V - (own_cooperates ? L : 0.0);
  }
};

// Channel whose expected payoffs equal the (x, y) prisoner's dilemma matrix.
inline StochasticChannel stochastic_params_from_xy(double x, double y, double V,
                                                   ShockCorrelation mode = ShockCorrelation::correlated) {
  if (!(V > 2.0 + x - y))
    throw invalid_parameter("stochastic channel requires V > 2 + x - y (V=" + std::to_string(V) + ")");
  StochasticChannel ch;
  ch.V = V;
  ch.L = x - y;
  ch.p = {1.0 / V, x / V, (2.0 + x - y) / V};
  ch.mode = mode;
  ch.validate();
  return ch;
}

class PDEnv {
 public:
  explicit PDEnv(PDGame game, std::optional<StochasticChannel> channel = std::nullopt)
      : game_(game), channel_(std::move(channel)) {
    if (game_.channel == PayoffChannel::stochastic && !channel_)
      throw usage_error("stochastic payoff channel requires channel parameters");
    if (channel_) channel_->validate();
  }

  std::size_t num_agents() const { return 2; }
  std::size_t num_actions() const { return 2; }
  const PDGame& game() const { return game_; }
  const std::optional<StochasticChannel>& channel() const { return channel_; }
  bool stochastic() const { return game_.channel == PayoffChannel::stochastic; }

  std::pair<double, double> reward_range() const {
    if (stochastic()) return {std::min(-channel_->L, 0.0), std::max(channel_->V, channel_->V - channel_->L)};
    const double lo = std::min({2.0, 1.0, game_.x, game_.y});
    const double hi = std::max({2.0, 1.0, game_.x, game_.y});
    return {lo, hi};
  }

  std::pair<double, double> pd_step(Action a1, Action a2, RngStream& rng) const {
    if (a1 > kDefect || a2 > kDefect) throw usage_error("prisoner's dilemma actions must be C or D");
    if (!stochastic()) return {game_.payoff(a1, a2), game_.payoff(a2, a1)};
    const auto& ch = *channel_;
    const std::size_t k = (a1 == kCooperate) + (a2 == kCooperate);
    const double pk = ch.p[k];
    double z1, z2;
    if (ch.mode == ShockCorrelation::correlated) {
      z1 = z2 = rng.uniform() < pk ? ch.V : 0.0;
    } else {
      z1 = rng.uniform() < pk ? ch.V : 0.0;
      z2 = rng.uniform() < pk ? ch.V : 0.0;
    }
    return {z1 - (a1 == kCooperate ? ch.L : 0.0), z2 - (a2 == kCooperate ? ch.L : 0.0)};
  }

  void step(std::span<const Action> actions, RngStream& rng, std::span<double> rewards) const {
    auto [r1, r2] = pd_step(actions[0], actions[1], rng);
    rewards[0] = r1;
    rewards[1] = r2;
  }

 private:
  PDGame game_;
  std::optional<StochasticChannel> channel_;
};

// ---------------------------------------------------------------------------
// Logit duopoly over a finite price grid.

class LogitDuopolyEnv {
 public:
  struct Params {
    double d = 2.0;
    double mu = 1.0 / 6.0;
    double c = 1.0;
    double price_min = 1.4;
    double price_step = 0.1;
    std::size_t num_prices = 7;
    // Output multiplier applied to logit profits.
    double scale = 10.0;
    bool operator==(const Params&) const = default;
  };

  LogitDuopolyEnv() : LogitDuopolyEnv(Params{}) {}
  explicit LogitDuopolyEnv(Params params) : params_(params) {
    if (!(params_.mu > 0.0)) throw invalid_parameter("mu must be positive");
    if (params_.num_prices < 1) throw invalid_parameter("price grid must be nonempty");
    const std::size_t n = params_.num_prices;
    profit_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) profit_[i * n + j] = logit_profit(price(i), price(j));
  }

  const Params& params() const { return params_; }
  std::size_t num_agents() const { return 2; }
  std::size_t num_actions() const { return params_.num_prices; }
  double price(std::size_t k) const { return params_.price_min + params_.price_step * static_cast<double>(k); }

  // Raw formula, any positive prices.
  double logit_profit(double p_i, double p_j) const {
    const double ei = std::exp((params_.d - p_i) / params_.mu);
    const double ej = std::exp((params_.d - p_j) / params_.mu);
    return params_.scale * (p_i - params_.c) * ei / (1.0 + ei + ej);
  }

  // Market shares (own, rival, outside good).
  std::array<double, 3> shares(double p_i, double p_j) const {
    const double ei = std::exp((params_.d - p_i) / params_.mu);
    const double ej = std::exp((params_.d - p_j) / params_.mu);
    const double den = 1.0 + ei + ej;
    return {ei / den, ej / den, 1.0 / den};
  }

  double profit(Action k_i, Action k_j) const { return profit_[k_i * params_.num_prices + k_j]; }

  // G(p) = profit when the rival charges the same price.
  std::vector<double> duopoly_distortion() const {
    std::vector<double> g(params_.num_prices);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = profit(k, k);
    return g;
  }

  std::pair<double, double> reward_range() const {
    auto [lo, hi] = std::minmax_element(profit_.begin(), profit_.end());
    return {*lo, *hi};
  }

  void step(std::span<const Action> actions, RngStream&, std::span<double> rewards) const {
    const std::size_t n = params_.num_prices;
    if (actions[0] >= n || actions[1] >= n) throw usage_error("price index out of range");
    rewards[0] = profit_[actions[0] * n + actions[1]];
    rewards[1] = profit_[actions[1] * n + actions[0]];
  }

 private:
  Params params_;
  std::vector<double> profit_;
};

static_assert(Environment<DecisionAutomatonEnv>);
static_assert(Environment<PDEnv>);
static_assert(Environment<LogitDuopolyEnv>);

using AnyEnvironment = std::variant<DecisionAutomatonEnv, PDEnv, LogitDuopolyEnv>;

}  // namespace qbl
