#include <gtest/gtest.h>

#include <numeric>

#include "qbl/engine.hpp"
#include "qbl/metrics.hpp"

using namespace qbl;

namespace {

Trace synthetic_trace(const std::vector<std::pair<double, double>>& deltas) {
  Trace tr(2, 2, {QTable{1.0, 1.0}, QTable{1.0, 1.0}}, deltas.size());
  const std::vector<Action> acts{0, 0};
  const std::vector<double> rew{1.0, 1.0};
  const std::vector<QTable> q{QTable{1.0, 1.0}, QTable{1.0, 1.0}};
  for (auto [d1, d2] : deltas) {
    const std::vector<double> d{d1, d2};
    tr.push(acts, rew, q, d);
  }
  return tr;
}

std::vector<AgentSpec> pd_agents(double alpha, double eps) {
  return {AgentSpec{alpha, eps, 0.95, 0.0, {1.0, 0.0}}, AgentSpec{alpha, eps, 0.95, 0.0, {1.0, 0.0}}};
}

SimConfig pd_config(std::size_t T, std::size_t n, QTable init = QTable{0.95, 1.0}) {
  SimConfig c;
  c.horizon = T;
  c.num_paths = n;
  c.initial_q = {init, init};
  return c;
}

}  // namespace

TEST(Welfare, ConstantRewardIsExact) {
  DecisionAutomatonEnv env(-0.5, 1.0, 1);  // action 2 in state 2 pays 1 forever
  std::vector<AgentSpec> agents{AgentSpec{0.5, 0.0, 0.95, 0.0, {1.0, 0.0}}};
  SimConfig cfg;
  cfg.horizon = 5000;
  cfg.num_paths = 3;
  cfg.initial_q = {QTable{0.9, 1.0}};
  cfg.window = trailing_window(5000, 0.8);
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  EXPECT_EQ(mean_welfare(b.paths)[0], 1.0);
  EXPECT_EQ(mean_welfare(b.paths, Window{0, 5000})[0], 1.0);
  EXPECT_EQ(welfare_standard_error(b.paths), 0.0);
}

TEST(Welfare, WindowErrors) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.5, 0.1);
  auto cfg = pd_config(1000, 2);
  cfg.trace_level = TraceLevel::full;
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  EXPECT_THROW(mean_welfare(b.paths, Window{10, 10}), usage_error);
  EXPECT_THROW(mean_welfare(b.paths, Window{0, 2000}), usage_error);
  EXPECT_THROW(mean_welfare(b.paths, Window{100, 200}), usage_error);
  // Traces answer any window and agree with the recorded one.
  const auto wt = mean_welfare(std::span<const Trace>(b.traces), Window{0, 1000});
  const auto wr = mean_welfare(b.paths);
  EXPECT_NEAR(wt[0], wr[0], 1e-12);
  EXPECT_NEAR(wt[1], wr[1], 1e-12);
  EXPECT_NO_THROW(mean_welfare(std::span<const Trace>(b.traces), Window{100, 200}));
}

TEST(ProfileFrequencies, SumToOne) {
  PDEnv env(PDGame{2.5, -0.5});
  for (double eps : {0.0, 0.1, 0.5}) {
    const auto agents = pd_agents(0.3, eps);
    const auto b = run_batch(env, std::span<const AgentSpec>(agents), pd_config(3000, 5));
    const auto f = profile_frequencies(b.paths);
    EXPECT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(ProfileFrequencies, FullExperimentationIsUniform) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.3, 1.0);
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), pd_config(50000, 4));
  for (double f : profile_frequencies(b.paths)) EXPECT_NEAR(f, 0.25, 0.01);
}

// x + y = 2: welfare = 1 + freq(CC) for symmetric specifications.
TEST(ProfileFrequencies, WelfareTracksJointCooperation) {
  PDEnv env(PDGame{2.5, -0.5});
  for (double alpha : {0.1, 0.3, 0.5})
    for (double eps : {0.05, 0.1, 0.2}) {
      const auto agents = pd_agents(alpha, eps);
      const auto b = run_batch(env, std::span<const AgentSpec>(agents), pd_config(10000, 20));
      const auto f = profile_frequencies(b.paths);
      EXPECT_NEAR(pooled_welfare(b.paths), 1.0 + f[0], 0.02) << alpha << " " << eps;
    }
}

TEST(ExitTime, SyntheticSequence) {
  const Trace tr = synthetic_trace({{-1, -1}, {-1, -1}, {1, 1}, {1, 1}, {1, 1}});
  EXPECT_EQ(exit_time(tr, ExitDirection::to_cooperation), 2u);
  EXPECT_EQ(exit_time(tr, ExitDirection::to_defection), 0u);
  EXPECT_FALSE(exit_time(tr.truncated(3), ExitDirection::to_cooperation));
  EXPECT_EQ(exit_time(tr.truncated(4), ExitDirection::to_cooperation), 2u);
}

TEST(ExitTime, NeedsBothAgentsForTwoPeriods) {
  EXPECT_FALSE(exit_time(synthetic_trace({{1, -1}, {1, 1}, {-1, 1}, {1, 1}}), ExitDirection::to_cooperation));
  EXPECT_FALSE(exit_time(synthetic_trace({{0, 0}, {0, 0}}), ExitDirection::to_cooperation));
  const Trace tr = synthetic_trace({{-1, -1}, {2, -1}, {1, 1}});
  EXPECT_EQ(first_crossing_time(tr, ExitDirection::to_cooperation), 1u);
}

TEST(ExitTime, TruncationBeforeExitYieldsNone) {
  PDEnv env(PDGame{2.5, -0.5});
  const auto agents = pd_agents(0.5, 0.1);
  auto cfg = pd_config(10000, 10);
  cfg.trace_level = TraceLevel::full;
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  std::size_t with_exit = 0;
  for (std::size_t p = 0; p < b.paths.size(); ++p) {
    const auto e = exit_time(b.traces[p], ExitDirection::to_cooperation);
    EXPECT_EQ(e, b.paths[p].exit_to_cooperation);
    if (!e) continue;
    ++with_exit;
    EXPECT_FALSE(exit_time(b.traces[p].truncated(*e + 1), ExitDirection::to_cooperation));
    EXPECT_EQ(exit_time(b.traces[p].truncated(*e + 2), ExitDirection::to_cooperation), e);
  }
  EXPECT_GT(with_exit, 0u);
}

TEST(ExitFraction, CensoredPathsCountAsNoExit) {
  std::vector<PathResult> r(4);
  r[0].exit_to_cooperation = 10;
  r[2].exit_to_cooperation = 0;
  EXPECT_DOUBLE_EQ(exit_fraction(r, ExitDirection::to_cooperation), 0.5);
  EXPECT_DOUBLE_EQ(exit_fraction(r, ExitDirection::to_defection), 0.0);
}

TEST(ConditionalCurve, ConstantPositiveOpponent) {
  std::vector<std::pair<double, double>> d;
  for (int i = 0; i < 6000; ++i) d.push_back({-0.02 + 0.04 * (i % 600) / 600.0 + 1e-7, 1.0});
  const std::vector<Trace> traces{synthetic_trace(d)};
  HistogramSpec spec;
  spec.min_count = 100;
  const auto curve = conditional_frequency_curve(traces, spec);
  ASSERT_FALSE(curve.empty());
  for (const auto& b : curve) {
    EXPECT_EQ(b.frequency, 1.0);
    EXPECT_GE(b.count, spec.min_count);
    EXPECT_NEAR(b.upper - b.lower, spec.omega, 1e-12);
  }
  spec.min_count = 100000;
  EXPECT_TRUE(conditional_frequency_curve(traces, spec).empty());
}

TEST(ConditionalCurve, OpenIntervalsSkipBinEdges) {
  std::vector<std::pair<double, double>> d(10, {0.0, 1.0});
  HistogramSpec spec;
  spec.min_count = 1;
  EXPECT_TRUE(conditional_frequency_curve(std::vector<Trace>{synthetic_trace(d)}, spec).empty());
}

TEST(ConditionalCurve, DeterministicPayoffsMakeDeltaPredictive) {
  PDEnv env(PDGame{2.5, 0.0});
  const auto agents = pd_agents(0.1, 0.1);
  auto cfg = pd_config(200000, 1, QTable{1.5, 1.4});
  cfg.trace_level = TraceLevel::full;
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
  const auto curve = conditional_frequency_curve(b.traces, HistogramSpec{});
  ASSERT_FALSE(curve.empty());
  for (const auto& bin : curve) {
    EXPECT_GE(bin.frequency, 0.0);
    EXPECT_LE(bin.frequency, 1.0);
    if (bin.lower >= 0.02) EXPECT_GT(bin.frequency, 0.9) << bin.k;
    if (bin.upper <= -0.02) EXPECT_LT(bin.frequency, 0.1) << bin.k;
  }
}

TEST(ConditionalCurve, IndependentShocksDecoupleTheOpponent) {
  // Mean f_k over Delta_1 in (0, 0.02), pooled over four paths.
  auto small_positive = [](ShockCorrelation mode) {
    PDEnv env(PDGame{2.5, 0.0, PayoffChannel::stochastic}, stochastic_params_from_xy(2.5, 0.0, 5.0, mode));
    const auto agents = pd_agents(0.1, 0.1);
    auto cfg = pd_config(200000, 4);
    cfg.trace_level = TraceLevel::full;
    const auto b = run_batch(env, std::span<const AgentSpec>(agents), cfg);
    std::size_t n = 0;
    double sum = 0.0;
    for (const auto& bin : conditional_frequency_curve(b.traces, HistogramSpec{}))
      if (bin.lower >= 0.0 && bin.upper <= 0.02 + 1e-12) sum += bin.frequency, ++n;
    EXPECT_GT(n, 0u);
    return sum / static_cast<double>(n);
  };
  const double corr = small_positive(ShockCorrelation::correlated);
  const double ind = small_positive(ShockCorrelation::independent);
  EXPECT_GT(corr, 0.2);
  EXPECT_LT(ind, 0.6 * corr);
}

TEST(MedianDuration, SmallCases) {
  using T = std::optional<std::size_t>;
  const std::vector<T> a{3, 1, 2}, b{1, 2, 3, 4};
  EXPECT_EQ(median_duration(a, 100).median, 2.0);
  EXPECT_EQ(median_duration(b, 100).median, 2.5);
  const std::vector<T> c{T{}, T{}, 5};
  const auto s = median_duration(c, 100);
  EXPECT_TRUE(s.censored);
  EXPECT_EQ(s.median, 100.0);
  const std::vector<T> d{T{}, 5, 7};
  EXPECT_EQ(median_duration(d, 100).median, 7.0);
  EXPECT_THROW(median_duration(std::vector<T>{}, 100), usage_error);
}

namespace {
std::vector<std::optional<std::size_t>> durations(ShockCorrelation mode, double eps, bool first_crossing) {
  PDEnv env(PDGame{2.5, 0.0, PayoffChannel::stochastic}, stochastic_params_from_xy(2.5, 0.0, 5.0, mode));
  const auto agents = pd_agents(0.1, eps);
  const auto b = run_batch(env, std::span<const AgentSpec>(agents), pd_config(10000, 25, QTable{1.2, 1.25}));
  std::vector<std::optional<std::size_t>> out;
  for (const auto& p : b.paths) out.push_back(first_crossing ? p.first_crossing_up : p.exit_to_cooperation);
  return out;
}
}  // namespace

TEST(MedianDuration, IndependentShocksLengthenDefection) {
  const auto corr = median_duration(durations(ShockCorrelation::correlated, 0.05, false), 10000);
  const auto ind = median_duration(durations(ShockCorrelation::independent, 0.05, false), 10000);
  EXPECT_FALSE(corr.censored);
  EXPECT_GT(ind.median, 2.0 * corr.median);
}

TEST(MedianDuration, JointExitSlowerThanSingleCrossing) {
  const auto corr = median_duration(durations(ShockCorrelation::correlated, 0.1, false), 10000);
  const auto cross = median_duration(durations(ShockCorrelation::independent, 0.1, true), 10000);
  EXPECT_FALSE(corr.censored);
  EXPECT_GT(corr.median, cross.median);
}
