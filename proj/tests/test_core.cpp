#include <gtest/gtest.h>

#include <map>
#include <random>

#include "qbl/core.hpp"

using namespace qbl;

namespace {
AgentSpec spec(double alpha, double eps, double bias = 0.0, std::vector<double> g = {1.0, 0.0}) {
  return AgentSpec{alpha, eps, 0.95, bias, std::move(g)};
}
}  // namespace

TEST(QUpdate, HandEvaluatedExample) {
  const QTable q = q_update(QTable{1.0, 1.0}, 0, 2.0, 0.5, 0.95);
  EXPECT_NEAR(q[0], 1.025, 1e-12);
  EXPECT_EQ(q[1], 1.0);
}

TEST(QUpdate, ZeroStepIsIdentity) {
  const QTable q{0.3, -1.2, 4.5};
  EXPECT_EQ(q_update(q, 1, 7.0, 0.0, 0.95), q);
}

TEST(QUpdate, FullStepWithoutDiscountReplaces) {
  const QTable q = q_update(QTable{3.7, 0.2}, 1, -0.8, 1.0, 0.0);
  EXPECT_EQ(q[0], 3.7);
  EXPECT_EQ(q[1], -0.8);
}

TEST(QUpdate, MaxTakenOverPreUpdateTable) {
  // The played entry is the argmax: its own old value enters the target.
  const QTable q = q_update(QTable{2.0, 1.0}, 0, 0.0, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(q[0], 0.5 * 2.0 + 0.5 * (0.5 * 0.0 + 0.5 * 2.0));
}

TEST(QUpdate, ActionOutOfRangeIsUsageError) {
  QTable q{1.0, 1.0};
  EXPECT_THROW(q_update_inplace(q, 2, 1.0, 0.1, 0.95), usage_error);
}

TEST(QUpdate, BoundednessUnderRandomRewards) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double m = -3.0 + 2.0 * unit(gen), M = m + 0.1 + 4.0 * unit(gen);
    std::uniform_real_distribution<double> r(m, M);
    const std::size_t A = 2 + trial % 6;
    std::vector<double> init(A);
    for (auto& v : init) v = r(gen);
    QTable q(init);
    const double alpha = 0.01 + 0.99 * unit(gen), delta = 0.99 * unit(gen);
    for (int t = 0; t < 2000; ++t) {
      q_update_inplace(q, gen() % A, r(gen), alpha, delta);
      for (double v : q.values()) {
        ASSERT_GE(v, m);
        ASSERT_LE(v, M);
      }
    }
  }
}

TEST(QUpdate, NewValueLiesBetweenOldValueAndTarget) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-2.0, 3.0), a(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    QTable q{u(gen), u(gen), u(gen)};
    const Action act = gen() % 3;
    const double r = u(gen), alpha = a(gen), delta = a(gen) * 0.99;
    const double target = (1 - delta) * r + delta * q.max();
    const QTable n = q_update(q, act, r, alpha, delta);
    EXPECT_GE(n[act], std::min(q[act], target) - 1e-12);
    EXPECT_LE(n[act], std::max(q[act], target) + 1e-12);
    for (Action b = 0; b < 3; ++b)
      if (b != act) EXPECT_EQ(n[b], q[b]);
  }
}

TEST(BiasedScore, CooperationBiasExample) {
  const auto s = biased_score(QTable{0.95, 1.0}, spec(0.5, 0.1, 0.04));
  EXPECT_NEAR(s[0], 0.99, 1e-12);
  EXPECT_NEAR(s[1], 1.0, 1e-12);
}

TEST(BiasedScore, NaiveScoresEqualValues) {
  const QTable q{0.3, 1.7, -0.2};
  const auto s = biased_score(q, spec(0.5, 0.1, 0.0, {5.0, -2.0, 9.0}));
  EXPECT_EQ(s, std::vector<double>(q.values().begin(), q.values().end()));
}

TEST(BiasedScore, DuopolyDistortionExample) {
  const auto s = biased_score(QTable{2.0, 1.8}, spec(0.1, 0.1, 0.03, {1.97, 2.44}));
  EXPECT_NEAR(s[0], 2.0591, 1e-12);
  EXPECT_NEAR(s[1], 1.8732, 1e-12);
}

TEST(SelectAction, TieGoesToLowestIndex) {
  RngStream rng(1, 0, 0);
  EXPECT_EQ(select_action(QTable{1.0, 1.0}, spec(0.1, 0.0), rng), 0u);
  EXPECT_TRUE(kTiesFavorLowestIndex);
}

TEST(SelectAction, SmallBiasDoesNotOvercomeGap) {
  RngStream rng(1, 0, 0);
  EXPECT_EQ(select_action(QTable{0.95, 1.0}, spec(0.1, 0.0, 0.04), rng), 1u);
  EXPECT_EQ(select_action(QTable{0.95, 1.0}, spec(0.1, 0.0, 0.06), rng), 0u);
}

TEST(SelectAction, FullExperimentationIsUniform) {
  for (std::size_t A : {2u, 7u}) {
    RngStream rng(42, 3, 1);
    std::vector<double> q(A, 0.0);
    q[A - 1] = 10.0;
    const QTable table(q);
    const AgentSpec s{0.1, 1.0, 0.95, 0.0, std::vector<double>(A, 0.0)};
    const int N = 70000;
    std::vector<int> counts(A, 0);
    for (int i = 0; i < N; ++i) ++counts[select_action(table, s, rng)];
    double chi2 = 0.0;
    const double e = static_cast<double>(N) / static_cast<double>(A);
    for (int c : counts) chi2 += (c - e) * (c - e) / e;
    // 99.9% quantiles: df=1 -> 10.83, df=6 -> 22.46
    EXPECT_LT(chi2, A == 2 ? 10.83 : 22.46) << "A=" << A;
  }
}

TEST(SelectAction, NaiveEquivalenceWithArgmax) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> coarse(0, 4);  // coarse values force ties
  RngStream rng(9, 0, 0);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t A = 2 + i % 6;
    std::vector<double> v(A);
    for (auto& x : v) x = 0.25 * coarse(gen);
    std::vector<double> g(A);
    for (auto& x : g) x = 0.5 * coarse(gen);
    const QTable q(v);
    const Action a = select_action(q, AgentSpec{0.1, 0.0, 0.95, 0.0, g}, rng);
    EXPECT_EQ(a, static_cast<Action>(std::max_element(v.begin(), v.end()) - v.begin()));
  }
}

TEST(AgentSpec, ValidationRejectsBadParameters) {
  EXPECT_THROW(spec(0.0, 0.1).validate(2), invalid_parameter);
  EXPECT_THROW(spec(1.1, 0.1).validate(2), invalid_parameter);
  EXPECT_THROW(spec(0.5, -0.1).validate(2), invalid_parameter);
  EXPECT_THROW((AgentSpec{0.5, 0.1, 1.0, 0.0, {1, 0}}).validate(2), invalid_parameter);
  EXPECT_THROW(spec(0.5, 0.1).validate(3), invalid_parameter);
  EXPECT_NO_THROW(spec(1.0, 1.0).validate(2));
}

TEST(RngStream, StreamsAreReproducibleAndDistinct) {
  RngStream a(7, 3, 0), b(7, 3, 0), c(7, 3, 1), d(7, 4, 0), e(8, 3, 0);
  std::vector<double> va, vb, vc, vd, ve;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a.uniform());
    vb.push_back(b.uniform());
    vc.push_back(c.uniform());
    vd.push_back(d.uniform());
    ve.push_back(e.uniform());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
  EXPECT_NE(va, ve);
  for (double x : va) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}
