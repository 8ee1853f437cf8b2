#pragma once

// Randomized checks of the trigonometric algebra behind the angular SDE,
// the two drift forms, the complement symmetry and the Ito change of
// variables back to the eigenvalue drift.
//
// Errors are measured relative to the sum of absolute values of the terms
// involved, which is the scale rounding errors live on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/dynamics.hpp"
#include "bjl/roots.hpp"

namespace bjl {

struct IdentityCheck {
  std::string name;
  std::size_t samples = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

inline bool all_passed(const std::vector<IdentityCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
}

namespace detail {

struct Sampler {
  std::mt19937_64 engine;
  explicit Sampler(std::uint64_t seed) : engine(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(engine); }

  /// Interior alcove point: m sorted uniforms on (0, pi/2), distinct.
  AlcovePoint alcove(int m) {
    std::vector<double> phi(static_cast<std::size_t>(m));
    for (double& x : phi) x = uniform(0.0, kHalfPi);
    std::sort(phi.begin(), phi.end(), std::greater<>());
    return AlcovePoint(std::move(phi));
  }

  /// Pair (a, b) of distinct angles in (0, pi/2).
  std::pair<double, double> pair() {
    const double a = uniform(0.0, kHalfPi);
    double b = uniform(0.0, kHalfPi);
    while (b == a) b = uniform(0.0, kHalfPi);
    return {a, b};
  }
};

inline double rel_err(double lhs, double rhs, double scale) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs), scale});
}

inline IdentityCheck run_check(std::string name, std::size_t samples, double tol,
                               const std::function<double()>& one) {
  IdentityCheck c{std::move(name), samples, 0.0, tol, false};
  for (std::size_t k = 0; k < samples; ++k) c.max_error = std::max(c.max_error, one());
  c.passed = c.max_error <= tol;
  return c;
}

}  // namespace detail

/// The four identities that turn the Ito drift of arcsin(sqrt(lambda)) into
/// the cotangent form: the two product-to-sum rules, the single-particle
/// drift rewrite and the collapse of the pairwise term.
inline std::vector<IdentityCheck> trig_identity_suite(std::size_t samples = 10000, std::uint64_t seed = 1,
                                                      double tol = 1e-12) {
  detail::Sampler rng(seed);
  std::vector<IdentityCheck> out;
  out.push_back(detail::run_check("sin_sq_difference", samples, tol, [&] {
    const auto [a, b] = rng.pair();
    const double lhs = std::sin(a) * std::sin(a) - std::sin(b) * std::sin(b);
    const double rhs = std::sin(a + b) * std::sin(a - b);
    return detail::rel_err(lhs, rhs, std::sin(a) * std::sin(a) + std::sin(b) * std::sin(b));
  }));
  out.push_back(detail::run_check("cross_square_sum", samples, tol, [&] {
    const auto [a, b] = rng.pair();
    const double sa = std::sin(a), ca = std::cos(a), sb = std::sin(b), cb = std::cos(b);
    const double lhs = sa * sa * cb * cb + ca * ca * sb * sb;
    const double sp = std::sin(a + b), sm = std::sin(a - b);
    const double rhs = 0.5 * (sp * sp + sm * sm);
    return detail::rel_err(lhs, rhs, 0.0);
  }));
  out.push_back(detail::run_check("single_particle_drift", samples, tol, [&] {
    const double phi = rng.uniform(0.0, kHalfPi);
    const double beta = rng.uniform(0.1, 5.0);
    const double p = rng.uniform(0.1, 10.0);
    const double q = rng.uniform(0.1, 10.0);
    const double s2 = std::sin(phi) * std::sin(phi);
    const double t1 = beta * (p - (p + q) * s2) / std::sin(2.0 * phi);
    const double t2 = detail::cot(2.0 * phi);
    const double r1 = beta * (p - q) / 2.0 * detail::cot(phi);
    const double r2 = (beta * q - 1.0) * detail::cot(2.0 * phi);
    return detail::rel_err(t1 - t2, r1 + r2, std::abs(t1) + std::abs(t2) + std::abs(r1) + std::abs(r2));
  }));
  out.push_back(detail::run_check("pairwise_collapse", samples, tol, [&] {
    const auto [a, b] = rng.pair();
    const double sp = std::sin(a + b), sm = std::sin(a - b);
    const double lhs = (sp * sp + sm * sm) / (2.0 * std::sin(2.0 * a) * sp * sm);
    const double cp = detail::cot(a + b), cm = detail::cot(a - b), c2 = detail::cot(2.0 * a);
    const double rhs = -c2 + (cp + cm) / 2.0;
    return detail::rel_err(lhs, rhs, std::abs(c2) + (std::abs(cp) + std::abs(cm)) / 2.0);
  }));
  return out;
}

/// Eigenvalue-SDE drift recovered from the angular drift by Ito's formula:
/// lambda = sin^2 phi gives drift_lambda_i = sin(2 phi_i) b_i(phi) + cos(2 phi_i).
inline std::vector<double> ito_lambda_drift(const AlcovePoint& phi, const ModelParams& params) {
  const std::vector<double> b = drift_explicit(phi, multiplicities(params));
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = std::sin(2.0 * phi[i]) * b[i] + std::cos(2.0 * phi[i]);
  return out;
}

/// Full identity suite: the trig chain plus further algebraic rules, the
/// drift cross-oracle, complement equivariance and the Ito chain.
inline std::vector<IdentityCheck> identity_suite(std::size_t samples = 10000, std::uint64_t seed = 1) {
  std::vector<IdentityCheck> out = trig_identity_suite(samples, seed);
  detail::Sampler rng(seed + 1);
  out.push_back(detail::run_check("inverse_sin_double", samples, 1e-12, [&] {
    const double phi = rng.uniform(0.0, kHalfPi);
    const double lhs = 1.0 / std::sin(2.0 * phi);
    const double c1 = detail::cot(phi), c2 = detail::cot(2.0 * phi);
    return detail::rel_err(lhs, c1 - c2, std::abs(c1) + std::abs(c2));
  }));
  out.push_back(detail::run_check("sin_double_product", samples, 1e-12, [&] {
    const auto [a, b] = rng.pair();
    const double sp = std::sin(a + b), sm = std::sin(a - b);
    const double cp = detail::cot(a + b), cm = detail::cot(a - b);
    const double rhs = (cp + cm) * sp * sm;
    return detail::rel_err(std::sin(2.0 * a), rhs, (std::abs(cp) + std::abs(cm)) * std::abs(sp * sm));
  }));
  out.push_back(detail::run_check("cot_addition", samples, 1e-12, [&] {
    const auto [u, v] = rng.pair();
    const double cu = detail::cot(u), cv = detail::cot(v);
    const double lhs = detail::cot(u + v);
    const double rhs = (cu * cv - 1.0) / (cu + cv);
    return detail::rel_err(lhs, rhs, (std::abs(cu * cv) + 1.0) / std::abs(cu + cv));
  }));
  out.push_back(detail::run_check("csc_squared", samples, 1e-12, [&] {
    const double z = rng.uniform(0.0, kPi);
    const double c = detail::cot(z);
    const double s = std::sin(z);
    return detail::rel_err(1.0 / (s * s), 1.0 + c * c, 1.0 + c * c);
  }));
  out.push_back(detail::run_check("drift_root_sum_vs_explicit", 1000, 1e-10, [&] {
    const int m = rng.integer(1, 5);
    const Multiplicities k{rng.uniform(-2.0, 4.0), rng.uniform(-1.0, 6.0), rng.uniform(0.05, 3.0)};
    const AlcovePoint phi = rng.alcove(m);
    const auto a = drift_root_sum(phi, k);
    const auto b = drift_explicit(phi, k);
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, detail::rel_err(a[i], b[i], 0.0));
    return err;
  }));
  out.push_back(detail::run_check("complement_equivariance", 1000, 1e-10, [&] {
    const int m = rng.integer(1, 5);
    const ModelParams params(rng.uniform(0.2, 4.0), rng.uniform(0.5, 8.0), rng.uniform(0.5, 8.0), m);
    const AlcovePoint phi = rng.alcove(m);
    const auto lhs = drift_explicit(complement(phi), multiplicities(params));
    const auto rhs = drift_explicit(phi, multiplicities(params.swapped()));
    const std::size_t mm = rhs.size();
    double err = 0.0;
    for (std::size_t i = 0; i < mm; ++i) err = std::max(err, detail::rel_err(lhs[i], -rhs[mm - 1 - i], 0.0));
    return err;
  }));
  out.push_back(detail::run_check("ito_chain", 1000, 1e-10, [&] {
    const int m = rng.integer(1, 5);
    const ModelParams params(rng.uniform(0.2, 4.0), rng.uniform(0.5, 8.0), rng.uniform(0.5, 8.0), m);
    const AlcovePoint phi = rng.alcove(m);
    const auto ito = ito_lambda_drift(phi, params);
    const auto direct = lambda_drift(phi_to_lambda(phi).span(), params);
    double err = 0.0;
    for (std::size_t i = 0; i < ito.size(); ++i) err = std::max(err, detail::rel_err(ito[i], direct[i], 0.0));
    return err;
  }));
  return out;
}

}  // namespace bjl
