#include <gtest/gtest.h>

#include "qbl/engine.hpp"
#include "qbl/metrics.hpp"

using namespace qbl;

namespace {

std::vector<AgentSpec> pd_agents(double alpha, double eps, double b1 = 0.0, double b2 = 0.0) {
  return {AgentSpec{alpha, eps, 0.95, b1, {1.0, 0.0}}, AgentSpec{alpha, eps, 0.95, b2, {1.0, 0.0}}};
}

SimConfig pd_config(std::size_t T, std::size_t n, std::uint64_t seed = 1, TraceLevel level = TraceLevel::none) {
  SimConfig c;
  c.horizon = T;
  c.num_paths = n;
  c.initial_q = {QTable{0.95, 1.0}, QTable{0.95, 1.0}};
  c.master_seed = seed;
  c.trace_level = level;
  return c;
}

void expect_same(const PathResult& a, const PathResult& b) {
  EXPECT_EQ(a.path_index, b.path_index);
  EXPECT_EQ(a.reward_total, b.reward_total);
  EXPECT_EQ(a.reward_window, b.reward_window);
  EXPECT_EQ(a.profile_counts, b.profile_counts);
  EXPECT_EQ(a.exit_to_cooperation, b.exit_to_cooperation);
  EXPECT_EQ(a.exit_to_defection, b.exit_to_defection);
  EXPECT_EQ(a.first_crossing_up, b.first_crossing_up);
}

}  // namespace

TEST(RunPath, SameSeedSameTrace) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.5, 0.1);
  const auto cfg = pd_config(3000, 1, 99, TraceLevel::full);
  const auto a = run_path(env, std::span<const AgentSpec>(agents), cfg, 4);
  const auto b = run_path(env, std::span<const AgentSpec>(agents), cfg, 4);
  ASSERT_TRUE(a.trace && b.trace);
  EXPECT_TRUE(*a.trace == *b.trace);
  EXPECT_EQ(a.trace->size(), 3000u);
  const auto c = run_path(env, std::span<const AgentSpec>(agents), cfg, 5);
  EXPECT_FALSE(*a.trace == *c.trace);
}

TEST(RunPath, ArityAndShapeErrors) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.5, 0.1);
  std::vector<AgentSpec> one{agents[0]};
  auto cfg = pd_config(10, 1);
  EXPECT_THROW(run_path(env, std::span<const AgentSpec>(one), cfg, 0), usage_error);
  cfg.initial_q = {QTable{1.0, 1.0}};
  EXPECT_THROW(run_path(env, std::span<const AgentSpec>(agents), cfg, 0), usage_error);
  cfg = pd_config(10, 1);
  cfg.initial_q[1] = QTable{1.0, 1.0, 1.0};
  EXPECT_THROW(run_path(env, std::span<const AgentSpec>(agents), cfg, 0), usage_error);
  cfg = pd_config(0, 1);
  EXPECT_THROW(run_path(env, std::span<const AgentSpec>(agents), cfg, 0), usage_error);
  cfg = pd_config(10, 1);
  cfg.window = Window{5, 20};
  EXPECT_THROW(run_path(env, std::span<const AgentSpec>(agents), cfg, 0), usage_error);
}

TEST(RunBatch, BatchOfOneEqualsRunPath) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.3, 0.1);
  const auto cfg = pd_config(2000, 1, 5, TraceLevel::full);
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  const auto p = run_path(env, std::span<const AgentSpec>(agents), cfg, 0);
  ASSERT_EQ(b.paths.size(), 1u);
  expect_same(b.paths[0], p.result);
  EXPECT_TRUE(b.traces[0] == *p.trace);
}

TEST(RunBatch, SerialAndParallelAreBitIdentical) {
  const StochasticChannel ch = stochastic_params_from_xy(2.5, 0.0, 5.0, ShockCorrelation::independent);
  PDEnv env(PDGame{2.5, 0.0, PayoffChannel::stochastic}, ch);
  const auto agents = pd_agents(0.1, 0.1, 0.02, 0.06);
  auto cfg = pd_config(4000, 24, 77, TraceLevel::full);
  cfg.threads = 1;
  const auto serial = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  for (std::size_t threads : {2u, 3u, 8u}) {
    cfg.threads = threads;
    const auto par = run_batch(env, std::span<const AgentSpec>(agents), cfg);
    ASSERT_EQ(par.paths.size(), serial.paths.size());
    for (std::size_t i = 0; i < par.paths.size(); ++i) {
      expect_same(par.paths[i], serial.paths[i]);
      EXPECT_TRUE(par.traces[i] == serial.traces[i]);
    }
  }
}

TEST(RunBatch, ExceptionsPropagateFromWorkers) {
  EXPECT_THROW(parallel_for(16, 4,
                            [](std::size_t j) {
                              if (j == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Trace, ReplayReproducesEveryPeriod) {
  LogitDuopolyEnv env;
  const auto g = env.duopoly_distortion();
  std::vector<AgentSpec> agents{AgentSpec{0.1, 0.1, 0.95, 0.03, g}, AgentSpec{0.1, 0.1, 0.95, 0.0, g}};
  SimConfig cfg;
  cfg.horizon = 5000;
  cfg.initial_q = {QTable{2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8}, QTable{2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8}};
  cfg.trace_level = TraceLevel::full;
  cfg.delta_spec = {3, DeltaSpec::Orientation::high_minus_low};
  const auto out = run_path(env, std::span<const AgentSpec>(agents), cfg, 2);
  const Trace& tr = *out.trace;
  std::vector<QTable> q = cfg.initial_q;
  double total0 = 0.0;
  for (std::size_t t = 0; t < tr.size(); ++t) {
    for (std::size_t i = 0; i < 2; ++i) {
      const Action a = tr.action(t, i);
      ASSERT_EQ(tr.reward(t, i), env.profit(a, tr.action(t, 1 - i)));
      q_update_inplace(q[i], a, tr.reward(t, i), agents[i].alpha, agents[i].delta);
      auto s = tr.q(t, i);
      ASSERT_TRUE(std::equal(s.begin(), s.end(), q[i].values().begin()));
      ASSERT_EQ(tr.delta(t, i), compute_delta(q[i], agents[i], cfg.delta_spec));
    }
    total0 += tr.reward(t, 0);
  }
  EXPECT_EQ(total0, out.result.reward_total[0]);
}

TEST(Trace, UnplayedEntriesNeverMove) {
  LogitDuopolyEnv env;
  const auto g = env.duopoly_distortion();
  std::vector<AgentSpec> agents{AgentSpec{0.3, 0.2, 0.95, 0.01, g}, AgentSpec{0.3, 0.2, 0.95, 0.02, g}};
  SimConfig cfg;
  cfg.horizon = 20000;
  cfg.initial_q = {QTable{2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8}, QTable{2.0, 1.8, 1.8, 1.8, 1.8, 1.8, 1.8}};
  std::size_t checked = 0;
  run_path(env, std::span<const AgentSpec>(agents), cfg, 0, [&](const PeriodView& v) {
    for (std::size_t i = 0; i < 2; ++i)
      for (Action a = 0; a < 7; ++a)
        if (a != v.actions[i]) {
          ASSERT_EQ(v.q_before[i][a], v.q_after[i][a]);
          ++checked;
        }
  });
  EXPECT_EQ(checked, 20000u * 2 * 6);
}

TEST(Trace, QValuesStayWithinRewardRange) {
  PDEnv env(PDGame{2.5, 0.0, PayoffChannel::stochastic}, stochastic_params_from_xy(2.5, 0.0, 5.0));
  const auto agents = pd_agents(0.5, 0.2);
  const auto [lo, hi] = env.reward_range();
  run_path(env, std::span<const AgentSpec>(agents), pd_config(50000, 1), 0, [&](const PeriodView& v) {
    for (const auto& q : v.q_after)
      for (double x : q.values()) {
        ASSERT_GE(x, lo);
        ASSERT_LE(x, hi);
      }
  });
}

// In a high-Q phase (both pre-update max Q in (1,2)) with greedy play, every
// profile moves both Deltas in the same direction.
TEST(SignComovement, MillionQualifyingPeriods) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.5, 0.1);
  SimConfig cfg = pd_config(10000, 1);
  cfg.initial_q = {QTable{1.5, 1.4}, QTable{1.5, 1.4}};
  std::size_t qualifying = 0, violations = 0, path = 0;
  while (qualifying < 1000000) {
    ASSERT_LT(path, 2000u);
    run_path(env, std::span<const AgentSpec>(agents), cfg, path++, [&](const PeriodView& v) {
      double rho[2];
      for (std::size_t i = 0; i < 2; ++i) {
        const QTable& q = v.q_before[i];
        const double m = q.max();
        if (!(m > 1.0 && m < 2.0) || v.actions[i] != greedy_action(q, agents[i])) return;
        rho[i] = compute_delta(v.q_after[i], agents[i], cfg.delta_spec) - compute_delta(q, agents[i], cfg.delta_spec);
      }
      ++qualifying;
      if (!((rho[0] > 0 && rho[1] > 0) || (rho[0] < 0 && rho[1] < 0))) ++violations;
    });
  }
  EXPECT_GE(qualifying, 1000000u);
  EXPECT_EQ(violations, 0u);
}

TEST(Window, TrailingWindow) {
  EXPECT_EQ(trailing_window(100000, 0.8), (Window{20000, 100000}));
  EXPECT_EQ(trailing_window(10, 1.0), (Window{0, 10}));
  EXPECT_THROW(trailing_window(10, 0.0), usage_error);
  EXPECT_THROW(trailing_window(10, 1.5), usage_error);
}

TEST(RunPath, DecisionEnvironmentSingleAgent) {
  DecisionAutomatonEnv env(-0.5, 1.0, 1);
  std::vector<AgentSpec> agents{AgentSpec{0.5, 0.3, 0.95, 0.0, {1.0, 0.0}}};
  SimConfig cfg;
  cfg.horizon = 1000;
  cfg.initial_q = {QTable{0.9, 1.0}};
  cfg.window = trailing_window(1000, 0.8);
  const auto out = run_path(env, std::span<const AgentSpec>(agents), cfg, 0);
  EXPECT_EQ(out.result.profile_counts.size(), 2u);
  EXPECT_EQ(out.result.profile_counts[0] + out.result.profile_counts[1], 1000u);
  EXPECT_EQ(out.result.window, (Window{200, 1000}));
}
