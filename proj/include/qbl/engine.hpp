#pragma once

// Path simulation and parallel batches. A path is fully determined by the
// master seed and its index; batches merge results by path index.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "qbl/core.hpp"
#include "qbl/delta.hpp"
#include "qbl/environments.hpp"

namespace qbl {

enum class TraceLevel { none, aggregates, full };

// Half-open period range [begin, end).
struct Window {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
  bool operator==(const Window&) const = default;
};

// Last `fraction` of the horizon.
inline Window trailing_window(std::size_t horizon, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw usage_error("window fraction must lie in (0,1]");
  const auto len = static_cast<std::size_t>(static_cast<double>(horizon) * fraction + 0.5);
  return {horizon - std::min(len, horizon), horizon};
}

struct SimConfig {
  std::size_t horizon = 10000;
  std::size_t num_paths = 1;
  std::vector<QTable> initial_q;  // one per agent
  std::uint64_t master_seed = 1;
  TraceLevel trace_level = TraceLevel::none;
  std::optional<Window> window;  // defaults to the whole horizon
  DeltaSpec delta_spec;
  std::size_t threads = 0;  // 0: hardware concurrency

  Window effective_window() const { return window.value_or(Window{0, horizon}); }
};

// Flat per-period record; q holds post-update tables, delta the post-update
// score differences (the values governing the next period's choice).
class Trace {
 public:
  Trace() = default;
  Trace(std::size_t agents, std::size_t actions, std::vector<QTable> initial_q, std::size_t reserve)
      : agents_(agents), actions_(actions), initial_q_(std::move(initial_q)) {
    actions_played_.reserve(reserve * agents);
    rewards_.reserve(reserve * agents);
    q_.reserve(reserve * agents * actions);
    delta_.reserve(reserve * agents);
  }

  std::size_t num_agents() const { return agents_; }
  std::size_t num_actions() const { return actions_; }
  std::size_t size() const { return agents_ == 0 ? 0 : rewards_.size() / agents_; }
  const std::vector<QTable>& initial_q() const { return initial_q_; }

  Action action(std::size_t t, std::size_t i) const { return actions_played_[t * agents_ + i]; }
  double reward(std::size_t t, std::size_t i) const { return rewards_[t * agents_ + i]; }
  double delta(std::size_t t, std::size_t i) const { return delta_[t * agents_ + i]; }
  std::span<const double> deltas(std::size_t t) const { return {delta_.data() + t * agents_, agents_}; }
  std::span<const double> q(std::size_t t, std::size_t i) const {
    return {q_.data() + (t * agents_ + i) * actions_, actions_};
  }
  // Table in force at the start of period t.
  QTable q_before(std::size_t t, std::size_t i) const {
    if (t == 0) return initial_q_[i];
    auto s = q(t - 1, i);
    return QTable(std::vector<double>(s.begin(), s.end()));
  }

  void push(std::span<const Action> acts, std::span<const double> rewards, std::span<const QTable> tables,
            std::span<const double> deltas) {
    actions_played_.insert(actions_played_.end(), acts.begin(), acts.end());
    rewards_.insert(rewards_.end(), rewards.begin(), rewards.end());
    for (const auto& tab : tables) q_.insert(q_.end(), tab.values().begin(), tab.values().end());
    delta_.insert(delta_.end(), deltas.begin(), deltas.end());
  }

  // Prefix of the first n periods.
  Trace truncated(std::size_t n) const {
    Trace out(agents_, actions_, initial_q_, n);
    n = std::min(n, size());
    out.actions_played_.assign(actions_played_.begin(), actions_played_.begin() + n * agents_);
    out.rewards_.assign(rewards_.begin(), rewards_.begin() + n * agents_);
    out.q_.assign(q_.begin(), q_.begin() + n * agents_ * actions_);
    out.delta_.assign(delta_.begin(), delta_.begin() + n * agents_);
    return out;
  }

  bool operator==(const Trace&) const = default;

 private:
  std::size_t agents_ = 0;
  std::size_t actions_ = 0;
  std::vector<QTable> initial_q_;
  std::vector<Action> actions_played_;
  std::vector<double> rewards_;
  std::vector<double> q_;
  std::vector<double> delta_;
};

struct PathResult {
  std::size_t path_index = 0;
  std::uint64_t master_seed = 0;
  std::size_t horizon = 0;
  std::size_t num_actions = 0;
  Window window;
  std::vector<double> reward_total;   // per agent, whole horizon
  std::vector<double> reward_window;  // per agent, over `window`
  // Joint-profile counts over the whole horizon; index = sum a_i * A^(n-1-i).
  std::vector<std::uint64_t> profile_counts;
  std::optional<std::size_t> exit_to_cooperation;
  std::optional<std::size_t> exit_to_defection;
  std::optional<std::size_t> first_crossing_up;
  std::optional<std::size_t> first_crossing_down;

  double mean_window_reward(std::size_t agent) const {
    return reward_window[agent] / static_cast<double>(window.length());
  }
};

// Per-period view handed to observers. Tables are post-update; `q_before`
// holds the tables that drove this period's choices.
struct PeriodView {
  std::size_t t;
  std::span<const Action> actions;
  std::span<const double> rewards;
  std::span<const QTable> q_before;
  std::span<const QTable> q_after;
  std::span<const double> deltas;
};

struct NoObserver {
  void operator()(const PeriodView&) const {}
};

namespace detail {

template <class Env>
void validate_run(const Env& env, std::span<const AgentSpec> agents, const SimConfig& config) {
  if (agents.size() != env.num_agents())
    throw usage_error("environment expects " + std::to_string(env.num_agents()) + " agent(s), got " +
                      std::to_string(agents.size()));
  if (config.horizon < 1) throw usage_error("horizon must be at least 1");
  if (config.num_paths < 1) throw usage_error("number of paths must be at least 1");
  if (config.initial_q.size() != agents.size()) throw usage_error("need one initial Q-table per agent");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    agents[i].validate(env.num_actions());
    if (config.initial_q[i].size() != env.num_actions())
      throw usage_error("initial Q-table length does not match action count");
  }
  const Window w = config.effective_window();
  if (w.begin >= w.end || w.end > config.horizon) throw usage_error("welfare window must be nonempty and within horizon");
}

}  // namespace detail

struct PathOutput {
  PathResult result;
  std::optional<Trace> trace;
};

// One path: simultaneous choice from pre-period tables, rewards, then each
// agent updates its played entry only.
template <Environment Env, class Observer = NoObserver>
PathOutput run_path(const Env& env_template, std::span<const AgentSpec> agents, const SimConfig& config,
                    std::size_t path_index, Observer&& observer = {}) {
  detail::validate_run(env_template, agents, config);
  Env env = env_template;
  const std::size_t n = agents.size();
  const std::size_t A = env.num_actions();
  const Window window = config.effective_window();

  std::vector<RngStream> agent_rng;
  agent_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) agent_rng.emplace_back(config.master_seed, path_index, i);
  RngStream env_rng(config.master_seed, path_index, kEnvironmentStream);

  std::vector<QTable> q = config.initial_q;
  std::vector<QTable> q_prev = q;
  std::vector<Action> acts(n);
  std::vector<double> rewards(n), deltas(n);

  PathOutput out;
  PathResult& res = out.result;
  res.path_index = path_index;
  res.master_seed = config.master_seed;
  res.horizon = config.horizon;
  res.num_actions = A;
  res.window = window;
  res.reward_total.assign(n, 0.0);
  res.reward_window.assign(n, 0.0);
  std::size_t profiles = 1;
  for (std::size_t i = 0; i < n; ++i) profiles *= A;
  res.profile_counts.assign(profiles, 0);

  if (config.trace_level == TraceLevel::full) out.trace.emplace(n, A, config.initial_q, config.horizon);

  ExitDetector up(ExitDirection::to_cooperation), down(ExitDirection::to_defection);
  CrossingDetector cross_up(ExitDirection::to_cooperation), cross_down(ExitDirection::to_defection);

  for (std::size_t t = 0; t < config.horizon; ++t) {
    for (std::size_t i = 0; i < n; ++i) acts[i] = select_action(q[i], agents[i], agent_rng[i]);
    env.step(std::span<const Action>(acts), env_rng, std::span<double>(rewards));

    if constexpr (!std::is_same_v<std::remove_cvref_t<Observer>, NoObserver>) q_prev = q;
    std::size_t profile = 0;
    for (std::size_t i = 0; i < n; ++i) {
      q_update_inplace(q[i], acts[i], rewards[i], agents[i].alpha, agents[i].delta);
      deltas[i] = compute_delta(q[i], agents[i], config.delta_spec);
      res.reward_total[i] += rewards[i];
      if (t >= window.begin && t < window.end) res.reward_window[i] += rewards[i];
      profile = profile * A + acts[i];
    }
    ++res.profile_counts[profile];

    up.observe(t, deltas);
    down.observe(t, deltas);
    cross_up.observe(t, deltas);
    cross_down.observe(t, deltas);

    if (out.trace) out.trace->push(acts, rewards, q, deltas);
    if constexpr (!std::is_same_v<std::remove_cvref_t<Observer>, NoObserver>)
      observer(PeriodView{t, acts, rewards, q_prev, q, deltas});
  }

  res.exit_to_cooperation = up.exit_time();
  res.exit_to_defection = down.exit_time();
  res.first_crossing_up = cross_up.crossing_time();
  res.first_crossing_down = cross_down.crossing_time();
  return out;
}

inline std::size_t resolve_threads(std::size_t requested, std::size_t jobs) {
  std::size_t t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(t, jobs));
}

// Runs f(job) for job in [0, jobs) on `threads` workers; rethrows the first
// exception after all workers stop.
template <class F>
void parallel_for(std::size_t jobs, std::size_t threads, F&& f) {
  threads = resolve_threads(threads, jobs);
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) f(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j; !failed.load() && (j = next.fetch_add(1)) < jobs;) {
          try {
            f(j);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

struct BatchResult {
  std::vector<PathResult> paths;  // indexed by path_index
  std::vector<Trace> traces;      // filled only for TraceLevel::full
};

template <Environment Env>
BatchResult run_batch(const Env& env_template, std::span<const AgentSpec> agents, const SimConfig& config) {
  detail::validate_run(env_template, agents, config);
  std::vector<PathOutput> outputs(config.num_paths);
  parallel_for(config.num_paths, config.threads,
               [&](std::size_t p) { outputs[p] = run_path(env_template, agents, config, p); });
  BatchResult batch;
  batch.paths.reserve(outputs.size());
  for (auto& o : outputs) {
    batch.paths.push_back(std::move(o.result));
    if (o.trace) batch.traces.push_back(std::move(*o.trace));
  }
  return batch;
}

}  // namespace qbl
