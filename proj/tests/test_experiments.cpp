#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bjl/experiments/appendix.hpp"
#include "bjl/experiments/density_vs_sim.hpp"
#include "bjl/experiments/hitting.hpp"
#include "bjl/experiments/identities.hpp"
#include "bjl/experiments/suites.hpp"

using namespace bjl;

TEST(Wilson, KnownValues) {
  // 0 of 500 and 250 of 500 at z = 1.96.
  const Interval zero = wilson_interval(0, 500);
  EXPECT_DOUBLE_EQ(zero.lo, 0.0);
  EXPECT_NEAR(zero.hi, 3.8416 / (500 + 3.8416), 1e-12);
  const Interval half = wilson_interval(250, 500);
  EXPECT_NEAR(half.lo + half.hi, 1.0, 1e-14);
  EXPECT_NEAR(half.hi - 0.5, 1.96 * std::sqrt(0.25 / 500 + 3.8416 / (4.0 * 500 * 500)) / (1 + 3.8416 / 500), 1e-14);
  EXPECT_THROW(wilson_interval(0, 0), ParameterError);
}

TEST(Proposition, PredictionTable) {
  EXPECT_TRUE(proposition_predicts_hit(HittingKind::Collision, ModelParams(0.5, 4, 4, 2)));
  EXPECT_FALSE(proposition_predicts_hit(HittingKind::Collision, ModelParams(2.0, 4, 4, 2)));
  EXPECT_FALSE(proposition_predicts_hit(HittingKind::Collision, ModelParams(0.5, 4, 4, 1)));
  EXPECT_TRUE(proposition_predicts_hit(HittingKind::LowerBoundary, ModelParams(1.0, 1.6, 4, 2)));
  EXPECT_FALSE(proposition_predicts_hit(HittingKind::LowerBoundary, ModelParams(1.0, 4, 4, 2)));
  EXPECT_TRUE(proposition_predicts_hit(HittingKind::UpperBoundary, ModelParams(1.0, 4, 1.6, 2)));
  EXPECT_FALSE(proposition_predicts_hit(HittingKind::UpperBoundary, ModelParams(1.0, 1.6, 4, 2)));
}

TEST(Hitting, SmallEnsembleReport) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 2.0;
  cfg.seed = 3;
  const auto rep = estimate_hitting(HittingKind::Collision, ModelParams(0.5, 4, 4, 2), cfg, 1e-3, 40);
  EXPECT_EQ(rep.n_paths, 40u);
  EXPECT_LE(rep.hits, 40u);
  EXPECT_DOUBLE_EQ(rep.hit_fraction, rep.hits / 40.0);
  EXPECT_TRUE(rep.predicted_hit);
  EXPECT_GT(rep.hits, 20u);
  EXPECT_GT(rep.mean_hit_time, 0.0);
  EXPECT_LE(rep.mean_hit_time, 2.0);
  const auto again = estimate_hitting(HittingKind::Collision, ModelParams(0.5, 4, 4, 2), cfg, 1e-3, 40, std::nullopt, 3);
  EXPECT_EQ(again.hits, rep.hits);
  EXPECT_EQ(again.mean_hit_time, rep.mean_hit_time);
}

TEST(Hitting, Validation) {
  SimConfig cfg;
  EXPECT_THROW(estimate_hitting(HittingKind::Collision, ModelParams(0.5, 4, 4, 1), cfg, 1e-3, 10), ParameterError);
  EXPECT_THROW(estimate_hitting(HittingKind::LowerBoundary, ModelParams(0.5, 4, 4, 2), cfg, 1e-12, 10), ParameterError);
  EXPECT_THROW(estimate_hitting(HittingKind::LowerBoundary, ModelParams(0.5, 4, 4, 2), cfg, 1e-3, 0), ParameterError);
}

TEST(Hitting, StartInsideTubeCountsAtTimeZero) {
  SimConfig cfg;
  cfg.horizon = 0.1;
  const auto rep = estimate_hitting(HittingKind::LowerBoundary, ModelParams(2.0, 4, 4, 2), cfg, 1e-2, 5,
                                    AlcovePoint({1.0, 0.005}));
  EXPECT_EQ(rep.hits, 5u);
  EXPECT_EQ(rep.mean_hit_time, 0.0);
}

TEST(RankOneHits, ClassificationSmall) {
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.horizon = 5.0;
  cfg.seed = 2;
  const auto low = estimate_rank_one_hits(1.0, 3.0, 0.5, cfg, 60);
  EXPECT_GT(low.fraction_zero(), 0.5);
  const auto high = estimate_rank_one_hits(3.0, 3.0, 0.5, cfg, 60);
  EXPECT_EQ(high.hit_zero, 0u);
  EXPECT_EQ(high.hit_one, 0u);
}

TEST(Appendix, SpotValuesAndBound) {
  EXPECT_NEAR(laplacian_ratio_closed_form(AlcovePoint({kPi / 4.0})), -5.0, 1e-13);
  EXPECT_DOUBLE_EQ(laplacian_bound(1), -9.0);
  EXPECT_DOUBLE_EQ(laplacian_bound(2), -34.0);
  EXPECT_DOUBLE_EQ(laplacian_bound(3), -83.0);
  EXPECT_THROW(laplacian_ratio_closed_form(AlcovePoint({0.5, 0.0})), SingularConfiguration);
}

TEST(Appendix, ClosedFormAgreesWithFiniteDifferences) {
  detail::Sampler s(4);
  for (int m = 1; m <= 3; ++m) {
    int checked = 0;
    while (checked < 50) {
      const AlcovePoint phi = s.alcove(m);
      if (detail::wall_margin(phi.span()) < 0.05) continue;
      const double closed = laplacian_ratio_closed_form(phi);
      EXPECT_NEAR(laplacian_ratio_richardson(phi, 1e-3), closed, 1e-6 * std::max(1.0, std::abs(closed)));
      ++checked;
    }
  }
  EXPECT_THROW(laplacian_ratio_finite_difference(AlcovePoint({0.5, 0.49995}), 1e-4), ParameterError);
}

TEST(Appendix, HProductMatchesEigenvalueForm) {
  detail::Sampler s(8);
  for (int m = 1; m <= 4; ++m) {
    for (int k = 0; k < 100; ++k) {
      const AlcovePoint phi = s.alcove(m);
      const double a = h_function(phi);
      const double b = h_function_lambda(phi_to_lambda(phi));
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b)) + 1e-15);
    }
  }
}

TEST(Appendix, VandermondeIdentity) {
  detail::Sampler s(9);
  for (int m = 1; m <= 4; ++m) {
    for (int k = 0; k < 200; ++k) {
      const LambdaPoint lam = phi_to_lambda(s.alcove(m));
      if (detail::min_gap(lam.span()) < 1e-3) continue;
      const auto c = vandermonde_identity_check(lam);
      EXPECT_NEAR(c.lhs, c.rhs, 1e-10 * std::max(1.0, std::abs(vandermonde(lam.span()))));
    }
  }
}

TEST(Identities, AllPass) {
  const auto trig = trig_identity_suite(10000, 1);
  ASSERT_EQ(trig.size(), 4u);
  EXPECT_TRUE(all_passed(trig));
  const auto full = identity_suite(2000, 2);
  for (const auto& c : full) EXPECT_TRUE(c.passed) << c.name << ' ' << c.max_error;
}

TEST(KsDistance, UniformSamplesExact) {
  // Samples at (k - 1/2)/n against the uniform law: KS distance 1/(2n).
  std::vector<double> x;
  for (int k = 1; k <= 100; ++k) x.push_back((k - 0.5) / 100.0);
  EXPECT_NEAR(ks_distance(x, [](double) { return 1.0; }), 0.005, 1e-14);
  EXPECT_THROW(ks_distance(std::vector<double>{}, [](double) { return 1.0; }), ParameterError);
}

TEST(DensityVsSim, RegimeGuard) {
  SimConfig cfg;
  EXPECT_THROW(density_vs_simulation_m2(ModelParams(1.0, 3, 3, 2), LambdaPoint({0.7, 0.3}), 0.5, 10, cfg),
               UnsupportedRegime);
  EXPECT_THROW(density_vs_simulation_m1(ModelParams(1.0, 0.5, 3, 1), 0.3, 0.5, 10, cfg), UnsupportedRegime);
}

TEST(DensityVsSim, SmallRunIsClose) {
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 4;
  const auto rep = density_vs_simulation_m1(ModelParams(2.0, 1.0, 1.0, 1), 0.3, 0.5, 4000, cfg, 1, 0.03);
  EXPECT_LT(rep.distance, 0.03);
  EXPECT_NEAR(rep.model_mass, 1.0, 1e-8);
}

TEST(Suites, AppendixAndIdentitiesPass) {
  for (int m = 1; m <= 4; ++m) {
    AppendixOptions o;
    o.m = m;
    o.bound_points = 2000;
    const SuiteResult r = appendix_suite(o);
    EXPECT_TRUE(r.passed) << r.report.dump();
  }
  EXPECT_TRUE(identities_suite(2000, 3).passed);
}
