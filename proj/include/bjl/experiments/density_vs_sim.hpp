#pragma once

// Simulated eigenvalue laws against the closed-form densities, and
// long-horizon ensembles against the stationary law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/dynamics.hpp"
#include "bjl/errors.hpp"
#include "bjl/orthopoly.hpp"
#include "bjl/quadrature.hpp"
#include "bjl/roots.hpp"
#include "bjl/semigroup.hpp"

namespace bjl {

struct DistanceReport {
  std::string metric;  // "ks" or "l1"
  double distance = 0.0;
  double threshold = 0.0;
  std::size_t n_paths = 0;
  double t = 0.0;
  double model_mass = 0.0;  // total model probability over the grid (1 up to quadrature error)
  bool passed = false;
};

/// Final eigenvalues (decreasing) of n_paths angular paths started at lambda_to_phi(start).
inline std::vector<std::vector<double>> simulate_final_lambdas(const LambdaPoint& start, const ModelParams& params,
                                                               SimConfig cfg, std::size_t n_paths,
                                                               unsigned threads = 1) {
  cfg.keep_path = false;
  const auto paths = simulate_ensemble(lambda_to_phi(start), params, cfg, n_paths, threads);
  std::vector<std::vector<double>> out;
  out.reserve(n_paths);
  for (const auto& p : paths) out.push_back(phi_to_lambda(AlcovePoint(p.final_state())).values());
  return out;
}

/// sup_x |F_n(x) - F(x)| where F(x) = int_0^x f for a density f on [0, 1]
/// whose only possible singularities sit at the endpoints.
template <class Density>
double ks_distance(std::vector<double> samples, Density&& f) {
  if (samples.empty()) throw ParameterError("ks_distance needs samples");
  std::sort(samples.begin(), samples.end());
  const NodeSet edge = tanh_sinh(81);
  const NodeSet inner = gauss_legendre(8);
  const double n = static_cast<double>(samples.size());
  double cdf = integrate(edge, 0.0, samples.front(), f);
  double prev = samples.front();
  double ks = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double x = samples[k];
    if (x > prev) cdf += integrate(inner, prev, x, f);
    prev = x;
    ks = std::max({ks, (k + 1) / n - cdf, cdf - k / n});
  }
  return ks;
}

namespace detail {

inline void check_density_regime(const ModelParams& params) {
  if (params.m() == 1) {
    if (!params.strong_regime()) throw UnsupportedRegime("density comparison needs the strong regime");
    return;
  }
  if (params.m() == 2 && params.beta() == 2.0) {
    if (!params.strong_regime()) throw UnsupportedRegime("density comparison needs the strong regime");
    return;
  }
  throw UnsupportedRegime(
      "closed-form transition densities exist here only for m = 1 or beta = 2 with m = 2; general beta needs "
      "multivariate Jacobi polynomials that are out of scope");
}

}  // namespace detail

/// m = 1: Kolmogorov-Smirnov distance between the simulated law of lambda(t)
/// and the series density.
inline DistanceReport density_vs_simulation_m1(const ModelParams& params, double theta, double t, std::size_t n_paths,
                                               SimConfig cfg, unsigned threads = 1, double threshold = 0.01) {
  detail::check_density_regime(params);
  if (params.m() != 1) throw ParameterError("density_vs_simulation_m1 needs m = 1");
  cfg.horizon = t;
  const SpectralExponents e = spectral_exponents(params);
  const JacobiBasis basis(e.r, e.s, 60);
  const int N = std::min(basis.max_degree(), default_truncation(t));
  const auto finals = simulate_final_lambdas(LambdaPoint({theta}), params, cfg, n_paths, threads);
  std::vector<double> xs;
  xs.reserve(finals.size());
  for (const auto& v : finals) xs.push_back(v[0]);
  auto f = [&](double x) { return univariate_density(theta, x, t, basis, N).value; };
  DistanceReport rep;
  rep.metric = "ks";
  rep.distance = ks_distance(xs, f);
  rep.threshold = threshold;
  rep.n_paths = n_paths;
  rep.t = t;
  rep.model_mass = integrate(tanh_sinh(201), 0.0, 1.0, f);
  rep.passed = rep.distance < threshold;
  return rep;
}

/// m = 2, beta = 2: L1 distance between a symmetrized bins x bins histogram of
/// (lambda_1, lambda_2) and the cell integrals of the determinantal density.
/// Each sample adds 1/2 to the cells of (l1, l2) and (l2, l1); the model cell
/// mass integrates p_t(theta, sort(x, y)) / 2.
inline DistanceReport density_vs_simulation_m2(const ModelParams& params, const LambdaPoint& theta, double t,
                                               std::size_t n_paths, SimConfig cfg, unsigned threads = 1,
                                               int bins = 20, double threshold = 0.1) {
  detail::check_density_regime(params);
  if (params.m() != 2) throw ParameterError("density_vs_simulation_m2 needs m = 2");
  if (bins < 1) throw ParameterError("bins must be positive");
  cfg.horizon = t;
  const SpectralExponents e = spectral_exponents(params);
  const JacobiBasis basis(e.r, e.s, 60);
  const int N = std::min(basis.max_degree(), default_truncation(t));
  const auto finals = simulate_final_lambdas(theta, params, cfg, n_paths, threads);
  const auto ub = static_cast<std::size_t>(bins);
  std::vector<double> emp(ub * ub, 0.0);
  auto cell = [&](double x) { return std::min(ub - 1, static_cast<std::size_t>(x * bins)); };
  const double wsample = 0.5 / static_cast<double>(n_paths);
  for (const auto& v : finals) {
    emp[cell(v[0]) * ub + cell(v[1])] += wsample;
    emp[cell(v[1]) * ub + cell(v[0])] += wsample;
  }
  const NodeSet rule = gauss_legendre(6);
  const double hcell = 1.0 / bins;
  double l1 = 0.0;
  double mass = 0.0;
  for (std::size_t a = 0; a < ub; ++a) {
    for (std::size_t b = 0; b < ub; ++b) {
      double cm = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i) {
        for (std::size_t j = 0; j < rule.size(); ++j) {
          const double x = (static_cast<double>(a) + rule.x[i]) * hcell;
          const double y = (static_cast<double>(b) + rule.x[j]) * hcell;
          const LambdaPoint lam({std::max(x, y), std::min(x, y)});
          cm += rule.w[i] * rule.w[j] * 0.5 * km_density_beta2(theta, lam, t, basis, N).value;
        }
      }
      cm *= hcell * hcell;
      mass += cm;
      l1 += std::abs(emp[a * ub + b] - cm);
    }
  }
  DistanceReport rep;
  rep.metric = "l1";
  rep.distance = l1;
  rep.threshold = threshold;
  rep.n_paths = n_paths;
  rep.t = t;
  rep.model_mass = mass;
  rep.passed = l1 < threshold;
  return rep;
}

struct MomentComparison {
  std::string name;
  double simulated = 0.0;
  double standard_error = 0.0;
  double exact = 0.0;
  double z = 0.0;
  bool passed = false;
};

/// Ensemble moments E[sum lambda_i], E[sum lambda_i^2] at cfg.horizon against
/// the stationary quadrature moments, passing within z_max standard errors.
inline std::vector<MomentComparison> stationary_moment_check(const ModelParams& params, const LambdaPoint& start,
                                                             const SimConfig& cfg, std::size_t n_paths,
                                                             unsigned threads = 1, double z_max = 3.0) {
  if (n_paths < 2) throw ParameterError("moment check needs at least two paths");
  const StationaryMoments exact = stationary_moments(params);
  const auto finals = simulate_final_lambdas(start, params, cfg, n_paths, threads);
  std::vector<double> s1;
  std::vector<double> s2;
  for (const auto& v : finals) {
    double a = 0.0;
    double b = 0.0;
    for (double x : v) {
      a += x;
      b += x * x;
    }
    s1.push_back(a);
    s2.push_back(b);
  }
  auto summarize = [&](std::string name, const std::vector<double>& xs, double ex) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    MomentComparison c{std::move(name), mean, std::sqrt(var / n), ex, 0.0, false};
    c.z = c.standard_error > 0.0 ? (mean - ex) / c.standard_error : 0.0;
    c.passed = std::abs(c.z) <= z_max;
    return c;
  };
  return {summarize("mean_sum", s1, exact.sum), summarize("mean_sum_sq", s2, exact.sum_sq)};
}

/// m = 1: KS distance between the law of lambda(horizon) and the stationary
/// Beta(r + 1, s + 1) law.
inline DistanceReport stationary_ks_m1(const ModelParams& params, double theta, const SimConfig& cfg,
                                       std::size_t n_paths, unsigned threads = 1, double threshold = 0.02) {
  if (params.m() != 1) throw ParameterError("stationary_ks_m1 needs m = 1");
  const SpectralExponents e = spectral_exponents(params);
  const JacobiBasis basis(e.r, e.s, 0);
  const auto finals = simulate_final_lambdas(LambdaPoint({theta}), params, cfg, n_paths, threads);
  std::vector<double> xs;
  for (const auto& v : finals) xs.push_back(v[0]);
  DistanceReport rep;
  rep.metric = "ks";
  rep.distance = ks_distance(xs, [&](double x) { return basis.weight(x); });
  rep.threshold = threshold;
  rep.n_paths = n_paths;
  rep.t = cfg.horizon;
  rep.model_mass = 1.0;
  rep.passed = rep.distance < threshold;
  return rep;
}

}  // namespace bjl
