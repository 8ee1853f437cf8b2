#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/rational.hpp>
#include <cmath>

#include "bjl/dynamics.hpp"
#include "bjl/semigroup.hpp"

using namespace bjl;

namespace {

using Rational = boost::rational<long long>;

// Selberg integral over [0,1]^m of prod x^(a-1) (1-x)^(b-1) |Delta|^(2g).
double selberg(int m, double a, double b, double g) {
  using boost::math::tgamma;
  double out = 1.0;
  for (int j = 0; j < m; ++j) {
    out *= tgamma(a + j * g) * tgamma(b + j * g) * tgamma(1.0 + (j + 1) * g) /
           (tgamma(a + b + (m + j - 1) * g) * tgamma(1.0 + g));
  }
  return out;
}

// Backward generator in theta applied to f by central differences:
// sum_i 2 x_i (1 - x_i) d_ii f + b_i(x) d_i f, with b the eigenvalue drift.
template <class F>
double generator_fd(const std::vector<double>& x, const ModelParams& params, F&& f, double h) {
  const auto b = lambda_drift(x, params);
  const double f0 = f(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x;
    auto xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fp = f(xp);
    const double fm = f(xm);
    acc += 2.0 * x[i] * (1.0 - x[i]) * (fp - 2.0 * f0 + fm) / (h * h) + b[i] * (fp - fm) / (2.0 * h);
  }
  return acc;
}

// Integral over the ordered simplex lambda_1 > lambda_2 via lambda_2 = u lambda_1.
template <class F>
double simplex2(const NodeSet& rule, F&& f) {
  double acc = 0.0;
  for (std::size_t a = 0; a < rule.size(); ++a) {
    for (std::size_t b = 0; b < rule.size(); ++b) {
      const double l1 = rule.x[a];
      const double l2 = l1 * rule.x[b];
      if (!(l1 > l2)) continue;
      acc += rule.w[a] * rule.w[b] * l1 * f(LambdaPoint({l1, l2}));
    }
  }
  return acc;
}

// Outer tanh-sinh nodes round to the endpoints, where the weight is singular
// for negative exponents; the mass they carry is far below the tolerances.
bool interior(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

TEST(Partitions, CountsAndOrder) {
  EXPECT_EQ(partitions(1, 5).size(), 6u);
  for (int K = 0; K <= 8; ++K) {
    EXPECT_EQ(partitions(2, K).size(), static_cast<std::size_t>((K + 1) * (K + 2) / 2));
    EXPECT_EQ(partitions(3, K).size(), static_cast<std::size_t>((K + 1) * (K + 2) * (K + 3) / 6));
  }
  for (const auto& tau : partitions(3, 4)) {
    const auto n = tau.shifted();
    EXPECT_GT(n[0], n[1]);
    EXPECT_GT(n[1], n[2]);
    EXPECT_GE(n[2], 0);
  }
  EXPECT_THROW(Partition({1, 2}), ParameterError);
  EXPECT_THROW(Partition({-1}), ParameterError);
}

TEST(TauEigenvalue, HandValue) {
  // tau = (2, 1), m = 2: 2(2 + r + s + 1 + beta) + 1(1 + r + s + 1)
  const Partition tau({2, 1});
  EXPECT_DOUBLE_EQ(tau_eigenvalue(tau, 0.5, 1.0, 2.0), 2.0 * (2 + 0.5 + 1 + 1 + 2) + (1 + 0.5 + 1 + 1));
  EXPECT_DOUBLE_EQ(tau_eigenvalue(Partition({0, 0, 0}), 0.3, 0.4, 1.0), 0.0);
}

TEST(TauEigenvalue, ExponentBookkeepingIsExact) {
  // sum_i n_i (n_i + r + s + 1) + c / 2 = r_tau at beta = 2, n_i = tau_i + m - i.
  const Rational grid[] = {Rational(0), Rational(1, 2), Rational(3, 2), Rational(2, 3), Rational(-1, 3)};
  for (int m = 1; m <= 3; ++m) {
    for (const Rational& r : grid) {
      for (const Rational& s : grid) {
        const Rational c = km_constant_c<Rational>(m, Rational(2) * (r + 1), Rational(2) * (s + 1));
        for (const Partition& tau : partitions(m, 8)) {
          Rational lhs = c / 2;
          for (int n : tau.shifted()) lhs += Rational(n) * (Rational(n) + r + s + 1);
          EXPECT_EQ(lhs, tau_eigenvalue<Rational>(tau, r, s, Rational(2)));
        }
      }
    }
  }
}

TEST(KmConstant, RequiresBetaTwo) {
  EXPECT_THROW(km_constant_c(ModelParams(1.0, 3.0, 3.0, 2)), UnsupportedRegime);
  // m = 2, r = s = 0: c = -2 (0 + 2)
  EXPECT_DOUBLE_EQ(km_constant_c(ModelParams(2.0, 2.0, 2.0, 2)), -4.0);
}

class Univariate : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(Univariate, NormalizationChapmanKolmogorovReversibility) {
  const auto [r, s] = GetParam();
  const JacobiBasis basis(r, s, 80);
  const NodeSet rule = tanh_sinh(801);
  for (double theta : {0.05, 0.3, 0.8}) {
    for (double t : {0.05, 0.3, 1.0}) {
      const double mass = integrate(rule, [&](double x, double) { return interior(x) ? univariate_density(theta, x, t, basis).value : 0.0; });
      EXPECT_NEAR(mass, 1.0, 1e-8) << theta << ' ' << t;
    }
  }
  const double theta = 0.3;
  for (double lam : {0.1, 0.55, 0.9}) {
    const double two_step = integrate(rule, [&](double mu, double) {
      if (!interior(mu)) return 0.0;
      return univariate_density(theta, mu, 0.3, basis).value * univariate_density(mu, lam, 0.3, basis).value;
    });
    const double direct = univariate_density(theta, lam, 0.6, basis).value;
    EXPECT_NEAR(two_step, direct, 1e-8 * std::max(1.0, direct));
  }
  for (double a : {0.1, 0.4, 0.95}) {
    for (double b : {0.2, 0.7}) {
      const double lhs = basis.weight(a) * univariate_density(a, b, 0.2, basis).value;
      const double rhs = basis.weight(b) * univariate_density(b, a, 0.2, basis).value;
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_P(Univariate, SolvesBackwardEquation) {
  // d/dt p_t(theta, lambda) = L_theta p_t(theta, lambda), m = 1, from the SDE itself.
  const auto [r, s] = GetParam();
  const ModelParams params(2.0, r + 1.0, s + 1.0, 1);
  const JacobiBasis basis(r, s, 80);
  const double t = 0.25;
  for (double theta : {0.2, 0.6}) {
    for (double lam : {0.15, 0.5, 0.85}) {
      auto p = [&](const std::vector<double>& x) { return univariate_density(x[0], lam, t, basis, 40).value; };
      const double ht = 1e-5;
      const double dt = (univariate_density(theta, lam, t + ht, basis, 40).value -
                         univariate_density(theta, lam, t - ht, basis, 40).value) / (2.0 * ht);
      const double gen = generator_fd({theta}, params, p, 1e-4);
      EXPECT_NEAR(dt, gen, 1e-5 * std::max(1.0, std::abs(dt)));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Exponents, Univariate,
                         ::testing::Values(std::pair{0.0, 0.0}, std::pair{-0.5, 0.5}, std::pair{1.5, -0.3},
                                           std::pair{2.0, 2.0}));

TEST(UnivariateDensity, PositiveConvergesToWeightAndValidates) {
  const JacobiBasis basis(0.5, -0.4, 60);
  for (double x = 0.01; x < 1.0; x += 0.02) {
    EXPECT_GT(univariate_density(0.4, x, 0.1, basis).value, 0.0);
    EXPECT_NEAR(univariate_density(0.4, x, 20.0, basis).value, basis.weight(x), 1e-12 * basis.weight(x));
  }
  EXPECT_THROW(univariate_density(0.4, 0.5, 0.0, basis), ParameterError);
  EXPECT_THROW(univariate_density(1.4, 0.5, 0.1, basis), ParameterError);
  EXPECT_THROW(univariate_density(0.4, 0.5, 0.1, basis, 61), ParameterError);
  EXPECT_THROW(univariate_density(0.4, 0.5, 0.001, basis, 3, 1e-6), TruncationError);
  const auto ev = univariate_density(0.4, 0.5, 0.1, basis);
  EXPECT_EQ(ev.truncation_order, default_truncation(0.1));
  EXPECT_LT(ev.tail_bound, 1e-12);
}

TEST(Beta2, KarlinMcGregorAtOneParticleIsUnivariate) {
  const JacobiBasis basis(0.5, 1.0, 60);
  for (double lam : {0.1, 0.6}) {
    EXPECT_NEAR(km_density_beta2(LambdaPoint({0.3}), LambdaPoint({lam}), 0.2, basis).value,
                univariate_density(0.3, lam, 0.2, basis).value, 1e-14);
  }
}

TEST(Beta2, KarlinMcGregorEqualsPartitionSum) {
  for (double rs : {0.0, 0.5}) {
    const JacobiBasis basis(rs, rs, 60);
    for (const auto& th : {std::vector<double>{0.7, 0.3}, std::vector<double>{0.95, 0.05}}) {
      for (const auto& la : {std::vector<double>{0.6, 0.2}, std::vector<double>{0.51, 0.5}, std::vector<double>{0.99, 0.01}}) {
        const double km = km_density_beta2(LambdaPoint(th), LambdaPoint(la), 0.5, basis).value;
        const double ps = partition_sum_density_beta2(LambdaPoint(th), LambdaPoint(la), 0.5, basis).value;
        EXPECT_NEAR(km, ps, 1e-8 * std::max(1.0, std::abs(km)));
      }
    }
  }
}

TEST(Beta2, ThreeParticleFormsAgree) {
  const JacobiBasis basis(0.5, 0.0, 60);
  const LambdaPoint theta({0.8, 0.5, 0.1});
  const LambdaPoint lam({0.7, 0.4, 0.3});
  const double km = km_density_beta2(theta, lam, 0.4, basis).value;
  const double ps = partition_sum_density_beta2(theta, lam, 0.4, basis).value;
  EXPECT_NEAR(km, ps, 1e-8 * std::max(1.0, km));
}

TEST(Beta2, SolvesBackwardEquation) {
  // The generator of the eigenvalue SDE at beta = 2 in the starting point.
  for (double rs : {0.0, 0.5}) {
    const ModelParams params(2.0, rs + 2.0, rs + 2.0, 2);
    const JacobiBasis basis(rs, rs, 60);
    const LambdaPoint lam({0.65, 0.25});
    const double t = 0.3;
    auto p = [&](const std::vector<double>& x) { return km_density_beta2(LambdaPoint(x), lam, t, basis, 40).value; };
    for (const auto& theta : {std::vector<double>{0.7, 0.4}, std::vector<double>{0.5, 0.1}}) {
      const double ht = 1e-5;
      const double dt = (km_density_beta2(LambdaPoint(theta), lam, t + ht, basis, 40).value -
                         km_density_beta2(LambdaPoint(theta), lam, t - ht, basis, 40).value) / (2.0 * ht);
      EXPECT_NEAR(dt, generator_fd(theta, params, p, 1e-4), 1e-5 * std::max(1.0, std::abs(dt)));
    }
  }
}

TEST(Beta2, NormalizationAndChapmanKolmogorov) {
  const JacobiBasis basis(0.0, 0.0, 60);
  const NodeSet rule = gauss_legendre(40);
  const LambdaPoint theta({0.7, 0.3});
  const double mass = simplex2(rule, [&](const LambdaPoint& x) { return km_density_beta2(theta, x, 0.3, basis).value; });
  EXPECT_NEAR(mass, 1.0, 1e-8);
  const LambdaPoint lam({0.6, 0.2});
  const double two_step = simplex2(rule, [&](const LambdaPoint& mu) {
    return km_density_beta2(theta, mu, 0.3, basis).value * km_density_beta2(mu, lam, 0.3, basis).value;
  });
  const double direct = km_density_beta2(theta, lam, 0.6, basis).value;
  EXPECT_NEAR(two_step, direct, 1e-8 * std::max(1.0, direct));
}

TEST(Beta2, NonNegativeOnGrid) {
  const JacobiBasis basis(0.5, 0.0, 60);
  const LambdaPoint theta({0.8, 0.35});
  for (double t : {0.2, 1.0}) {
    for (int i = 0; i < 50; ++i) {
      for (int j = 0; j < i; ++j) {
        const LambdaPoint lam({(i + 0.5) / 50.0, (j + 0.5) / 50.0});
        EXPECT_GE(km_density_beta2(theta, lam, t, basis).value, -1e-10) << t << ' ' << i << ' ' << j;
      }
    }
  }
}

TEST(Beta2, ReversibleAgainstStationaryWeight) {
  const JacobiBasis basis(1.0, 0.5, 60);
  const LambdaPoint a({0.8, 0.35});
  const LambdaPoint b({0.55, 0.1});
  for (double t : {0.2, 0.5, 1.0}) {
    const double lhs = km_density_beta2(a, b, t, basis).value * stationary_density_beta2(a, basis);
    const double rhs = km_density_beta2(b, a, t, basis).value * stationary_density_beta2(b, basis);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs)) << t;
  }
}

TEST(Beta2, LongTimeLimitIsStationaryDensity) {
  const JacobiBasis basis(0.5, 1.0, 40);
  const LambdaPoint lam({0.6, 0.2});
  const double st = stationary_density_beta2(lam, basis);
  EXPECT_NEAR(partition_sum_density_beta2(LambdaPoint({0.9, 0.1}), lam, 30.0, basis).value, st, 1e-10 * st);
  EXPECT_NEAR(km_density_beta2(LambdaPoint({0.9, 0.1}), lam, 2.0, basis).value, st, 1e-3 * st);
  // the determinant cancels at long times and says so
  EXPECT_TRUE(km_density_beta2(LambdaPoint({0.9, 0.1}), lam, 30.0, basis).ill_conditioned);
  EXPECT_FALSE(km_density_beta2(LambdaPoint({0.9, 0.1}), lam, 0.5, basis).ill_conditioned);
  EXPECT_NEAR(partition_polynomial(Partition({0, 0}), lam, basis), 1.0, 1e-13);
}

TEST(Beta2, Guards) {
  const JacobiBasis basis(0.0, 0.0, 40);
  EXPECT_THROW(km_density_beta2(LambdaPoint({0.5, 0.5}), LambdaPoint({0.6, 0.2}), 0.5, basis), SingularConfiguration);
  EXPECT_THROW(km_density_beta2(LambdaPoint({0.7, 0.5}), LambdaPoint({0.6}), 0.5, basis), ParameterError);
  EXPECT_THROW(km_density_beta2(LambdaPoint({0.7, 0.5}), LambdaPoint({0.6, 0.2}), 0.01, basis), ParameterError);
  const auto ev = km_density_beta2(LambdaPoint({0.7, 0.5}), LambdaPoint({0.6, 0.6 - 1e-8}), 0.5, basis);
  EXPECT_TRUE(ev.ill_conditioned);
  EXPECT_THROW(partition_sum_density_beta2(LambdaPoint({0.7, 0.5}), LambdaPoint({0.6, 0.2}), 0.5, basis, 3, 1e-30),
               TruncationError);
}

TEST(Stationary, NormalizerMatchesSelberg) {
  struct Case {
    ModelParams params;
    double tol;
  };
  const Case cases[] = {{ModelParams(2.0, 2.0, 2.0, 2), 1e-10},  {ModelParams(2.0, 2.75, 3.5, 2), 1e-9},
                        {ModelParams(1.5, 2.0, 3.0, 1), 1e-10},  {ModelParams(2.0, 3.0, 3.5, 3), 1e-8},
                        {ModelParams(1.0, 2.5, 3.0, 2), 1e-9}, {ModelParams(1.0, 3.5, 4.0, 3), 1e-7}};
  for (const auto& c : cases) {
    const auto e = spectral_exponents(c.params);
    const int m = c.params.m();
    const double want = std::tgamma(m + 1.0) / selberg(m, e.r + 1.0, e.s + 1.0, c.params.beta() / 2.0);
    const double got = stationary_normalizer(c.params, m == 3 ? 101 : 201);
    EXPECT_NEAR(got / want, 1.0, c.tol) << c.params.beta() << ' ' << m;
  }
  EXPECT_NEAR(stationary_normalizer(ModelParams(2.0, 2.0, 2.0, 2)), 12.0, 1e-9);
  EXPECT_THROW(stationary_normalizer(ModelParams(2.0, 5.0, 5.0, 4)), ParameterError);
}

TEST(Stationary, Beta2DensityMatchesNormalizedLogDensity) {
  const ModelParams params(2.0, 2.75, 3.5, 2);
  const auto e = spectral_exponents(params);
  const JacobiBasis basis(e.r, e.s, 2);
  const double c = stationary_normalizer(params);
  for (const auto& v : {std::vector<double>{0.6, 0.2}, std::vector<double>{0.95, 0.9}}) {
    const LambdaPoint lam(v);
    EXPECT_NEAR(stationary_density_beta2(lam, basis), c * std::exp(stationary_log_density_unnormalized(lam, params)),
                1e-9 * stationary_density_beta2(lam, basis));
  }
  EXPECT_EQ(stationary_log_density_unnormalized(LambdaPoint({1.0, 0.2}), params), -INFINITY);
}

TEST(Stationary, IsReversibleForTheEigenvalueSde) {
  // Zero probability flux: d_i log(a_i rho) = b_i / a_i with a_i = 2 lambda_i (1 - lambda_i)
  // and rho the unnormalized stationary density, for every beta.
  for (const ModelParams& params : {ModelParams(0.7, 3.0, 4.0, 3), ModelParams(2.0, 2.5, 2.2, 2), ModelParams(1.0, 1.5, 0.8, 1)}) {
    const std::vector<double> x = params.m() == 3 ? std::vector<double>{0.8, 0.45, 0.2}
                                  : params.m() == 2 ? std::vector<double>{0.7, 0.35}
                                                    : std::vector<double>{0.4};
    const auto b = lambda_drift(x, params);
    auto log_flux = [&](std::vector<double> y, std::size_t i) {
      return std::log(2.0 * y[i] * (1.0 - y[i])) + stationary_log_density_unnormalized(LambdaPoint(y), params);
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x;
      auto xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (log_flux(xp, i) - log_flux(xm, i)) / 2e-6;
      EXPECT_NEAR(fd, b[i] / (2.0 * x[i] * (1.0 - x[i])), 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Stationary, MomentsOneParticleAreBetaMoments) {
  const ModelParams params(2.0, 3.0, 2.0, 1);  // r = 2, s = 1: Beta(3, 2)
  const auto mo = stationary_moments(params);
  EXPECT_NEAR(mo.sum, 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(mo.sum_sq, 3.0 * 4.0 / (5.0 * 6.0), 1e-12);
}

TEST(DefaultTruncation, Formula) {
  EXPECT_EQ(default_truncation(0.5), 17);
  EXPECT_EQ(default_truncation(20.0), 11);
  EXPECT_THROW(default_truncation(0.0), ParameterError);
}
