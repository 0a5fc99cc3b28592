#include <gtest/gtest.h>

#include <cmath>

#include "fedpriv/adaptive.hpp"
#include "fedpriv/harness.hpp"
#include "fedpriv/rates.hpp"
#include "test_util.hpp"

using namespace fedpriv;
using fedpriv::testing::make_config;

TEST(Mesh, StepAndEndpoints) {
  const ModelConfig c = make_config(10, 50, 1.0);
  const auto mesh = smoothness_mesh(c, 0.5, 2.0);
  EXPECT_EQ(mesh.front(), 0.5);
  EXPECT_EQ(mesh.back(), 2.0);
  EXPECT_GE(mesh.size(), 3u);
  const double step = mesh[1] - mesh[0];
  EXPECT_LE(step, 1 / std::log(500.0) + 1e-12);
  EXPECT_EQ(smoothness_mesh(c, 0.7, 0.7).size(), 1u);
  EXPECT_ANY_THROW(smoothness_mesh(c, 2.0, 1.0));
}

TEST(Grid, SingletonWhenRangeCollapses) {
  const ModelConfig c = make_config(10, 50, 1.0);
  const ResolutionGrid g = resolution_grid(c, 1.0, 1.0, false);
  ASSERT_EQ(g.levels.size(), 1u);
  EXPECT_EQ(g.levels.front(), optimal_resolution(c, false));
}

TEST(Grid, CardinalityBound) {
  const ModelConfig c = make_config(100, 100, 0.5);
  for (bool shared : {true, false}) {
    const ResolutionGrid g = resolution_grid(c, 0.05, 20.0, shared);
    EXPECT_LE(double(g.levels.size()), 10 * std::log(1e4));
    EXPECT_TRUE(std::is_sorted(g.levels.begin(), g.levels.end()));
    EXPECT_EQ(g.low_set.size() + g.high_set.size(), g.levels.size());
  }
}

TEST(Grid, LevelWeaklyDecreasingInSmoothness) {
  const ModelConfig c = make_config(20, 100, 0.3);
  for (bool shared : {true, false}) {
    int prev = 1 << 20;
    for (double s : smoothness_mesh(c, 0.3, 4.0)) {
      ModelConfig at = c;
      at.s = s;
      const int L = optimal_resolution(at, shared);
      EXPECT_LE(L, prev);
      prev = L;
    }
  }
}

TEST(Partition, SharedExample) {
  const ModelConfig c = make_config(100, 100, 1.0);
  std::vector<int> levels;
  for (int L = 1; L <= 20; ++L) levels.push_back(L);
  const GridPartition p = partition_grid(levels, c, true);
  EXPECT_EQ(p.low.back(), 13);
  EXPECT_EQ(p.high.front(), 14);
  EXPECT_EQ(p.low.size() + p.high.size(), 20u);
}

TEST(Partition, TinyBudgetAllHigh) {
  const ModelConfig c = make_config(10, 10, 0.1);  // eps^2 m n = 1 < 2
  const GridPartition p = partition_grid({1, 2, 3}, c, true);
  EXPECT_TRUE(p.low.empty());
  EXPECT_EQ(p.high.size(), 3u);
}

TEST(Partition, LocalIndicatorBranch) {
  std::vector<int> levels;
  for (int L = 1; L <= 16; ++L) levels.push_back(L);
  // sqrt(n) eps <= 1: bound eps sqrt(mn).
  const ModelConfig a = make_config(50, 16, 0.25);
  const double bound_a = 0.25 * std::sqrt(800.0);
  for (int L : partition_grid(levels, a, false).low) EXPECT_LE(std::exp2(L), bound_a);
  for (int L : partition_grid(levels, a, false).high) EXPECT_GT(std::exp2(L), bound_a);
  // sqrt(n) eps > 1: bound eps sqrt(mn) (1 + sqrt(n)).
  const ModelConfig b = make_config(50, 16, 0.5);
  const double bound_b = 0.5 * std::sqrt(800.0) * 5;
  for (int L : partition_grid(levels, b, false).low) EXPECT_LE(std::exp2(L), bound_b);
  for (int L : partition_grid(levels, b, false).high) EXPECT_GT(std::exp2(L), bound_b);
}

TEST(AdaptivePlan, SingleLowLevelHalvesBudget) {
  const ModelConfig c = make_config(10, 50, 1.0);
  ResolutionGrid g;
  g.levels = {3};
  g.low_set = {3};
  const ProtocolPlan ad = make_adaptive_plan(c, g);
  const ProtocolPlan plain = make_plan(Protocol::I, c, 3);
  ASSERT_EQ(ad.low.size(), 1u);
  EXPECT_TRUE(ad.coordinate.empty());
  ASSERT_EQ(ad.low[0].releases.size(), plain.low[0].releases.size());
  for (std::size_t r = 0; r < plain.low[0].releases.size(); ++r) {
    const auto& a = ad.low[0].releases[r];
    const auto& p = plain.low[0].releases[r];
    EXPECT_EQ(a.tau, p.tau);
    EXPECT_EQ(a.lipschitz, p.lipschitz);
    const double T = double(plain.low[0].releases.size());
    EXPECT_NEAR(a.gamma, 1.0 / (2 * p.lipschitz * std::sqrt(T * std::log(4 / 1e-3))), 1e-14);
  }
  EXPECT_EQ(ad.low[0].delta, c.delta / 2);
}

TEST(AdaptivePlan, EmptyHighSetIsThresholdTestAlone) {
  const ModelConfig c = make_config(10, 50, 1.0);
  ResolutionGrid g;
  g.levels = {2, 3};
  g.shared = true;
  g.low_set = {2, 3};
  const ProtocolPlan ad = make_adaptive_plan(c, g);
  EXPECT_TRUE(ad.rotated.empty());
  EXPECT_EQ(ad.low.size(), 2u);
  EXPECT_EQ(ad.low[0].components, 2 * static_cast<int>(ad.low[0].releases.size()));
}

TEST(AdaptivePlan, NoSubTestsNeverRejects) {
  ProtocolPlan empty;
  empty.protocol = Protocol::adaptive_local;
  empty.cfg = make_config(3, 5, 0.5);
  empty.max_level = 2;
  const Evaluation ev = simulate(empty, Signal{}, 4);
  EXPECT_TRUE(std::isinf(ev.statistic) && ev.statistic < 0);
  EXPECT_FALSE(decide(empty, ev, -1e300).reject);
}

TEST(AdaptivePlan, HighNormalizers) {
  const ModelConfig c = make_config(10, 50, 0.1);
  ResolutionGrid g;
  g.levels = {1, 2, 3, 4, 5};
  g.high_set = g.levels;
  const ProtocolPlan local = make_adaptive_plan(c, g);
  EXPECT_NEAR(local.high_normalizer, std::sqrt(std::max(std::log(5.0), 1.0)), 1e-15);
  g.shared = true;
  g.levels = {1, 2, 3, 4, 5, 6, 7, 8};
  g.low_set = {1, 2, 3};
  g.high_set = {4, 5, 6, 7, 8};
  const ProtocolPlan shared = make_adaptive_plan(c, g);
  EXPECT_NEAR(shared.high_normalizer, std::sqrt(std::log(8.0)), 1e-15);
  EXPECT_EQ(shared.rotated.size(), 5u);
  EXPECT_NEAR(shared.rotated[0].gamma,
              gamma_rotated_adaptive(0.1, 1e-3,
                                     std::max<double>(shared.rotated[0].K,
                                                      shared.rotated[0].retained / std::log(500.0)),
                                     5, 500, shared.rotated[0].tau),
              1e-15);
}

TEST(AdaptiveBudget, RecordsComposeWithinBudget) {
  for (bool shared : {false, true}) {
    for (double eps : {0.1, 0.5, 1.0}) {
      const ModelConfig c = make_config(10, 50, eps);
      const ResolutionGrid g = resolution_grid(c, 0.5, 2.0, shared);
      const ProtocolPlan plan = make_adaptive_plan(c, g);
      for (std::uint64_t r = 0; r < 3; ++r) {
        const Evaluation ev = simulate(plan, Signal{}, r, true);
        const PrivacyAccount acc = compose(ev.records);
        EXPECT_LE(acc.epsilon, eps * (1 + 1e-12));
        EXPECT_LE(acc.delta, c.delta * (1 + 1e-12));
      }
    }
  }
}

TEST(AdaptiveTests, EntryPointsMatchPlanEvaluation) {
  const ModelConfig c = make_config(10, 50, 0.5);
  const ResolutionGrid gl = resolution_grid(c, 0.5, 2.0, false);
  const ResolutionGrid gs = resolution_grid(c, 0.5, 2.0, true);
  const DistributedData data = sample_data(Signal{}, c, std::max(gl.levels.back(), gs.levels.back()), 3);
  const TestOutcome a = adaptive_test_local(data, c, gl, 1.0, 99);
  const Evaluation ev = evaluate(make_adaptive_plan(c, gl), data, 99);
  EXPECT_EQ(a.statistic, ev.statistic);
  EXPECT_EQ(a.reject, ev.statistic >= 1.0);
  EXPECT_ANY_THROW(adaptive_test_local(data, c, gs, 1.0, 99));
  EXPECT_ANY_THROW(adaptive_test_shared(data, c, gl, 1.0, 99));
  const TestOutcome b = adaptive_test_shared(data, c, gs, kInf, 99);
  EXPECT_FALSE(b.reject);
}

TEST(AdaptiveTests, RejectingLevelReported) {
  const ModelConfig c = make_config(10, 50, 1.0);
  const ResolutionGrid g = resolution_grid(c, 0.5, 2.0, false);
  const ProtocolPlan plan = make_adaptive_plan(c, g);
  const Signal f = gen_signal_single_level(g.levels.front(), 3.0, Spread::uniform);
  const TestOutcome o = decide(plan, simulate(plan, f, 1), 0.0);
  EXPECT_TRUE(o.reject);
  EXPECT_TRUE(std::find(g.levels.begin(), g.levels.end(), o.rejecting_level) != g.levels.end());
}

TEST(AdaptivePower, CloseToKnownSmoothnessTest) {
  // rho = 2 x theoretical rho_s at the true s = 1; oracle test is T_II at
  // L_s, the adaptive test searches s in [0.5, 2].
  const ModelConfig c = make_config(10, 50, 1.0);
  const int Ls = optimal_resolution(c, false);
  const double rho = 2 * std::sqrt(separation_rate_local(c));
  const ProtocolPlan oracle = make_plan(Protocol::II, c, Ls);
  const ProtocolPlan adaptive =
      make_adaptive_plan(c, resolution_grid(c, 0.5, 2.0, false));
  const int reps = 2000;
  const Signal f = gen_signal_single_level(Ls, rho, Spread::uniform);
  const double k_or = calibrate_threshold(oracle, 0.05, 2000, 1, 4);
  const double k_ad = calibrate_threshold(adaptive, 0.05, 2000, 1, 4);
  const double p_or = empirical_power(oracle, k_or, f, reps, 2, 4);
  const double p_ad = empirical_power(adaptive, k_ad, f, reps, 2, 4);
  EXPECT_GE(p_ad, p_or - 0.15) << "oracle " << p_or << " adaptive " << p_ad;
}
