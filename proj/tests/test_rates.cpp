#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fedpriv/rates.hpp"
#include "fedpriv/rng.hpp"
#include "test_util.hpp"

using namespace fedpriv;
using fedpriv::testing::make_config;
using fedpriv::testing::rel_err;

namespace {

// Independent evaluation of the rate summands.
struct Terms {
  double A, Bs, Bl, C, D;
};

Terms terms(double m, double n, double sigma, double s, double eps) {
  const double s2 = sigma * sigma;
  const double t = std::sqrt(std::min(1.0, n * eps * eps));
  return {std::pow(s2 / (m * n), 2 * s / (2 * s + 0.5)),
          std::pow(s2 / (m * std::pow(n, 1.5) * eps * t), 2 * s / (2 * s + 1)),
          std::pow(s2 / (m * n * n * eps * eps), 2 * s / (2 * s + 1.5)),
          std::pow(s2 / (std::sqrt(m) * n * t), 2 * s / (2 * s + 0.5)),
          s2 / (m * n * n * eps * eps)};
}

ModelConfig random_config(Engine& eng) {
  std::uniform_int_distribution<int> mi(1, 200), ni(1, 500);
  std::uniform_real_distribution<double> u(0, 1);
  ModelConfig c = make_config(mi(eng), ni(eng), 0.5);
  c.s = 0.1 + 4 * u(eng);
  c.sigma = std::exp(std::log(0.2) + u(eng) * std::log(25.0));
  const double lo = std::log(1.0 / c.N());
  c.epsilon = std::exp(lo + (0 - lo) * (0.001 + 0.999 * u(eng)));
  return c;
}

std::vector<double> fig_grid() { return log_grid(0.05, 1.0, 50); }

}  // namespace

TEST(RateTerms, MatchIndependentEvaluation) {
  Engine eng = make_engine(1);
  for (int i = 0; i < 200; ++i) {
    const ModelConfig c = random_config(eng);
    const RateTerms r = rate_terms(c);
    const Terms t = terms(c.m, c.n, c.sigma, c.s, c.epsilon);
    EXPECT_LT(rel_err(r.A, t.A), 1e-12);
    EXPECT_LT(rel_err(r.B_shared, t.Bs), 1e-12);
    EXPECT_LT(rel_err(r.B_local, t.Bl), 1e-12);
    EXPECT_LT(rel_err(r.C, t.C), 1e-12);
    EXPECT_LT(rel_err(r.D, t.D), 1e-12);
  }
}

TEST(SharedRate, CentralLargeBudgetRecoversClassicalTerm) {
  const ModelConfig c = make_config(1, 100, 1.0);
  const double A = std::pow(100.0, -0.8);
  EXPECT_NEAR(A, 0.02512, 1e-5);
  // With m = 1 the low-budget term coincides with the classical one.
  EXPECT_LT(rel_err(separation_rate_shared(c), 2 * A + 1e-4), 1e-12);
  const RegimeReport rep = classify_regime(c, true);
  EXPECT_EQ(rep.regime_id, 1);
  EXPECT_EQ(rep.dominant_term, "classical");
  EXPECT_EQ(rep.case_regime, 1);
}

TEST(SharedRate, LargerBudgetOnlyShrinksThePenalty) {
  ModelConfig a = make_config(1, 100, 1.0);
  ModelConfig b = a;
  b.epsilon = 10.0;
  EXPECT_EQ(rate_terms(a).A, rate_terms(b).A);
  EXPECT_LT(separation_rate_shared(b), separation_rate_shared(a));
  EXPECT_LT(separation_rate_shared(b) - rate_terms(b).A,
            separation_rate_shared(a) - rate_terms(a).A);
  EXPECT_EQ(classify_regime(b, true).regime_id, 1);
}

TEST(SharedRate, NonincreasingInEpsilonOnFigureGrid) {
  ModelConfig c = make_config(5, 5, 1.0);
  double prev = kInf;
  for (double eps : fig_grid()) {
    c.epsilon = eps;
    const double r = separation_rate_shared(c);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(LocalRate, AtLeastSharedInWindowAndEqualForOneServer) {
  ModelConfig c = make_config(5, 5, 1.0);
  bool strictly = false;
  for (double eps : fig_grid()) {
    c.epsilon = eps;
    EXPECT_GE(separation_rate_local(c), separation_rate_shared(c));
    strictly |= separation_rate_local(c) > separation_rate_shared(c) * (1 + 1e-9);
  }
  EXPECT_TRUE(strictly);
  ModelConfig one = make_config(1, 40, 1.0, 0.7);
  for (double eps : log_grid(1.0 / 40 * 1.001, 1.0, 60)) {
    one.epsilon = eps;
    EXPECT_LT(rel_err(separation_rate_local(one), separation_rate_shared(one)), 1e-12);
  }
}

TEST(LocalRate, FiniteAtDomainEdge) {
  ModelConfig c = make_config(5, 5, 1.0 / 25);
  EXPECT_TRUE(std::isfinite(separation_rate_local(c)));
  EXPECT_TRUE(std::isfinite(separation_rate_shared(c)));
  EXPECT_GT(separation_rate_local(c), 0);
}

TEST(Regime, SharedRegimeOneThreshold) {
  const double thr = std::pow(5.0, 0.2) * std::pow(5.0, -0.3);
  EXPECT_NEAR(thr, std::pow(5.0, -0.1), 1e-15);
  EXPECT_NEAR(thr, 0.8513, 1e-4);
  const ModelConfig c = make_config(5, 5, 0.9);
  EXPECT_EQ(case_regime(c, true), 1);
  EXPECT_EQ(classify_regime(c, true).regime_id, 1);
  ModelConfig at = c;
  at.epsilon = thr;
  EXPECT_EQ(case_regime(at, true), 1);  // equality takes the lower id
  at.epsilon = thr * (1 - 1e-9);
  EXPECT_NE(case_regime(at, true), 1);
}

TEST(Regime, LocalCollapseBelowQuarter) {
  ModelConfig c = make_config(5, 5, 0.5, 0.2);
  for (double eps : log_grid(1.0 / 25 * 1.0001, 1.0, 200)) {
    c.epsilon = eps;
    const RegimeReport rep = classify_regime(c, false);
    EXPECT_GE(rep.regime_id, 3) << eps;
    EXPECT_GE(rep.case_regime, 4) << eps;
  }
}

TEST(Regime, StructuralTiesGoToLowerId) {
  // m = 1 and n eps^2 >= 1 make the classical and low-budget terms equal.
  const ModelConfig c = make_config(1, 64, 0.5);
  const RateTerms r = rate_terms(c);
  EXPECT_EQ(r.A, r.C);
  EXPECT_EQ(classify_regime(c, true).regime_id, 1);
}

TEST(Regime, CaseListCoversEveryEpsilon) {
  Engine eng = make_engine(3);
  for (int i = 0; i < 500; ++i) {
    const ModelConfig c = random_config(eng);
    for (bool shared : {true, false}) {
      const int id = case_regime(c, shared);
      EXPECT_GE(id, 1);
      EXPECT_LE(id, 6);
    }
  }
}

TEST(Regime, ExponentsMatchTermScaling) {
  // Inside regime 6 rho^2 = D ~ eps^-2; regime 5 rho^2 ~ C ~ eps^{-2s/(2s+1/2)}.
  EXPECT_EQ(regime_rho_exponent(6, 1.0, true), -1.0);
  EXPECT_NEAR(regime_rho_exponent(5, 1.0, false), -1.0 / 2.5, 1e-15);
  EXPECT_EQ(regime_rho_exponent(1, 2.0, true), 0.0);
  EXPECT_EQ(regime_rho_exponent(4, 2.0, false), 0.0);
  EXPECT_NEAR(regime_rho_exponent(3, 1.0, true), -2.0 / 3, 1e-15);
  EXPECT_NEAR(regime_rho_exponent(3, 1.0, false), -2.0 / 3.5, 1e-15);
  EXPECT_ANY_THROW(regime_rho_exponent(7, 1.0, true));
  // Finite-difference slope of ln rho against ln eps for pure terms.
  for (double s : {0.5, 1.0, 3.0}) {
    const double e1 = 0.01, e2 = 0.011;
    const Terms a = terms(20, 3, 1, s, e1), b = terms(20, 3, 1, s, e2);
    const double slope_C = 0.5 * std::log(b.C / a.C) / std::log(e2 / e1);
    EXPECT_NEAR(slope_C, regime_rho_exponent(5, s, true), 1e-9);
    const double slope_Bs = 0.5 * std::log(b.Bs / a.Bs) / std::log(e2 / e1);
    EXPECT_NEAR(slope_Bs, regime_rho_exponent(3, s, true), 1e-9);
    const double slope_Bl = 0.5 * std::log(b.Bl / a.Bl) / std::log(e2 / e1);
    EXPECT_NEAR(slope_Bl, regime_rho_exponent(3, s, false), 1e-9);
  }
}

TEST(OptimalResolution, FloorAndClamp) {
  // rho >= 1 gives L = 1.
  ModelConfig big = make_config(1, 1, 1.0, 1.0, 1e-3, 5.0);
  EXPECT_GE(separation_rate_shared(big), 1.0);
  EXPECT_EQ(optimal_resolution(big, true), 1);
  Engine eng = make_engine(4);
  for (int i = 0; i < 200; ++i) {
    const ModelConfig c = random_config(eng);
    for (bool shared : {true, false}) {
      const double rho = std::sqrt(separation_rate(c, shared));
      const double raw = std::floor(std::log2(1 / rho) / c.s);
      EXPECT_EQ(optimal_resolution(c, shared),
                static_cast<int>(std::min(30.0, std::max(1.0, raw))));
    }
  }
}

TEST(OptimalResolution, SixteenthGivesFour) {
  // Any configuration with rho = 1/16 exactly: m = 1, n eps^2 >= 1 and a
  // sigma chosen so that A + C + D = 2A + D = 1/256 at s = 1.
  // Solve by bisection on sigma.
  auto rate = [](double sigma) {
    ModelConfig c = make_config(1, 1000, 1.0, 1.0, 1e-3, sigma);
    return separation_rate_shared(c);
  };
  double lo = 1e-3, hi = 10;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (rate(mid) < 1.0 / 256 ? lo : hi) = mid;
  }
  ModelConfig c = make_config(1, 1000, 1.0, 1.0, 1e-3, hi);
  EXPECT_NEAR(std::sqrt(separation_rate_shared(c)), 1.0 / 16, 1e-12);
  EXPECT_EQ(optimal_resolution(c, true), 4);
}

TEST(OptimalResolution, UnconstrainedMatchesClassicalChoice) {
  for (double s : {0.5, 1.0, 2.0}) {
    for (int n : {100, 10000}) {
      const ModelConfig c = make_config(1, n, 1.0, s);
      const double target = std::pow(double(n), 1 / (2 * s + 0.5));
      const double got = std::exp2(optimal_resolution(c, true));
      EXPECT_LE(got, 4 * target);
      EXPECT_GE(got, target / 4) << "s=" << s << " n=" << n;
    }
  }
}

TEST(RateCurve, SinglePointAndDomain) {
  const ModelConfig c = make_config(5, 5, 1.0);
  const std::vector<double> one = {0.3};
  EXPECT_EQ(rate_curve(c, one, true).size(), 1u);
  const std::vector<double> bad = {1.0 / 25};
  EXPECT_ANY_THROW(rate_curve(c, bad, true));
  const std::vector<double> above = {1.5};
  EXPECT_ANY_THROW(rate_curve(c, above, true));
}

TEST(RateCurve, ContiguousRegimeRuns) {
  for (auto [n, m] : {std::pair{5, 5}, std::pair{2, 15}}) {
    for (double s : {0.2, 0.5, 1.0, 3.0}) {
      for (bool shared : {true, false}) {
        ModelConfig c = make_config(m, n, 1.0, s);
        const auto rows = rate_curve(c, fig_grid(), shared);
        std::set<int> closed;
        int current = rows.front().regime_id;
        for (const auto& r : rows) {
          if (r.regime_id != current) {
            closed.insert(current);
            EXPECT_FALSE(closed.count(r.regime_id)) << "regime revisited";
            current = r.regime_id;
          }
        }
      }
    }
  }
}

TEST(RateCurve, MoreDistributedCostsMore) {
  const auto grid = fig_grid();
  for (double s : {0.2, 0.5, 1.0, 3.0}) {
    for (bool shared : {true, false}) {
      const auto a = rate_curve(make_config(5, 5, 1.0, s), grid, shared);
      const auto b = rate_curve(make_config(15, 2, 1.0, s), grid, shared);
      for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(b[i].rho2, a[i].rho2);
    }
  }
}

TEST(RateInvariants, RandomGrid) {
  Engine eng = make_engine(2024);
  for (int i = 0; i < 1000; ++i) {
    const ModelConfig c = random_config(eng);
    const double sh = separation_rate_shared(c);
    const double lo = separation_rate_local(c);
    EXPECT_LE(sh, lo);
    EXPECT_GT(sh, 0);
    for (bool shared : {true, false}) {
      const double r = separation_rate(c, shared);
      const RegimeReport rep = classify_regime(c, shared);
      EXPECT_LT(rel_err(rep.branch_value, r), 1e-12);
      EXPECT_EQ(rep.rho_squared, r);
      ModelConfig e = c;
      e.epsilon = std::min(1.0, c.epsilon * 1.37);
      EXPECT_LE(separation_rate(e, shared), r * (1 + 1e-12));
      ModelConfig mm = c;
      mm.m += 1 + c.m / 3;
      EXPECT_LE(separation_rate(mm, shared), r * (1 + 1e-12));
      ModelConfig nn = c;
      nn.n += 1 + c.n / 3;
      EXPECT_LE(separation_rate(nn, shared), r * (1 + 1e-12));
    }
  }
}

TEST(RateInvariants, OneServerNearClassical) {
  Engine eng = make_engine(5);
  for (int i = 0; i < 300; ++i) {
    ModelConfig c = random_config(eng);
    c.m = 1;
    c.sigma = 1;
    c.epsilon = std::max(c.epsilon, 1 / std::sqrt(double(c.N())));
    EXPECT_LE(separation_rate_shared(c), 4 * rate_terms(c).A);
  }
}

TEST(LogMultiplier, DefinedOnlyForLargeNAndPositiveDelta) {
  EXPECT_TRUE(std::isnan(log_multiplier_squared(make_config(1, 2, 1.0))));
  const ModelConfig c = make_config(10, 10, 1.0);
  const double ln = std::log(100.0);
  EXPECT_NEAR(log_multiplier_squared(c), std::log(ln) * std::pow(ln, 1.5) * std::log(1e3),
              1e-12);
}

TEST(LogGrid, EndpointsAndSpacing) {
  const auto g = log_grid(0.05, 1.0, 50);
  EXPECT_EQ(g.size(), 50u);
  EXPECT_EQ(g.front(), 0.05);
  EXPECT_EQ(g.back(), 1.0);
  for (std::size_t i = 2; i < g.size(); ++i)
    EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}
