#pragma once

// Named verification suites with JSON reports, shared by the command line
// tool and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/dynamics.hpp"
#include "bjl/experiments/appendix.hpp"
#include "bjl/experiments/density_vs_sim.hpp"
#include "bjl/experiments/hitting.hpp"
#include "bjl/experiments/identities.hpp"
#include "bjl/io.hpp"
#include "bjl/semigroup.hpp"

namespace bjl {

struct SuiteResult {
  std::string name;
  bool passed = false;
  Json report;
};

inline SuiteResult identities_suite(std::size_t samples = 10000, std::uint64_t seed = 1) {
  const auto checks = identity_suite(samples, seed);
  Json arr = Json::array();
  for (const auto& c : checks) arr.push_back(to_json(c));
  const bool ok = all_passed(checks);
  return SuiteResult{"identities", ok, Json{{"suite", "identities"}, {"passed", ok}, {"checks", std::move(arr)}}};
}

struct AppendixOptions {
  int m = 3;
  std::size_t bound_points = 10000;
  std::size_t fd_points = 200;
  double step = 1e-4;
  double fd_tolerance = 1e-4;
  double fd_min_margin = 0.05;  // finite differences are taken away from the walls
  std::uint64_t seed = 1;
};

/// Closed-form Laplacian ratio vs central differences, the lower bound c(m),
/// non-constancy of the ratio, the m = 1 spot value, the Vandermonde identity
/// and the two forms of h, all at dimension opt.m.
inline SuiteResult appendix_suite(const AppendixOptions& opt) {
  if (opt.m < 1) throw ParameterError("m must be at least 1");
  detail::Sampler rng(opt.seed);
  const int m = opt.m;
  Json checks = Json::array();
  bool ok = true;
  auto add = [&](const std::string& name, double value, double tol, bool passed, Json extra = Json::object()) {
    Json j{{"name", name}, {"value", value}, {"tolerance", tol}, {"passed", passed}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    checks.push_back(std::move(j));
    ok = ok && passed;
  };

  double fd_err = 0.0;
  double rich_err = 0.0;
  for (std::size_t k = 0; k < opt.fd_points; ++k) {
    AlcovePoint phi = rng.alcove(m);
    while (detail::wall_margin(phi.span()) < opt.fd_min_margin) phi = rng.alcove(m);
    const double closed = laplacian_ratio_closed_form(phi);
    const double scale = std::max(1.0, std::abs(closed));
    fd_err = std::max(fd_err, std::abs(laplacian_ratio_finite_difference(phi, opt.step) - closed) / scale);
    rich_err = std::max(rich_err, std::abs(laplacian_ratio_richardson(phi, 1e-3) - closed) / scale);
  }
  add("finite_difference_vs_closed_form", fd_err, opt.fd_tolerance, fd_err < opt.fd_tolerance,
      Json{{"step", opt.step}, {"points", opt.fd_points}, {"min_margin", opt.fd_min_margin}});
  add("richardson_vs_closed_form", rich_err, 1e-6, rich_err < 1e-6, Json{{"step", 1e-3}});

  const double c = laplacian_bound(m);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < opt.bound_points; ++k) {
    const double v = laplacian_ratio_closed_form(rng.alcove(m));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  add("ratio_above_bound", lo - c, 0.0, lo > c, Json{{"bound", c}, {"min_ratio", lo}, {"points", opt.bound_points}});
  add("ratio_not_constant", hi - lo, 1.0, hi - lo > 1.0, Json{{"max_ratio", hi}});

  if (m == 1) {
    const AlcovePoint quarter({kPi / 4.0});
    const double v = laplacian_ratio_closed_form(quarter);
    const double fd = laplacian_ratio_finite_difference(quarter, opt.step);
    add("spot_value_pi_over_4", v, 1e-12, std::abs(v + 5.0) < 1e-12, Json{{"finite_difference", fd}});
  }

  double vd_err = 0.0;
  double h_err = 0.0;
  for (std::size_t k = 0; k < 1000; ++k) {
    const AlcovePoint phi = rng.alcove(m);
    const LambdaPoint lam = phi_to_lambda(phi);
    const auto vc = vandermonde_identity_check(lam);
    double scale = 0.0;
    for (std::size_t i = 0; i < lam.values().size(); ++i) {
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::size_t j = 0; j < lam.values().size(); ++j) {
        if (j == i) continue;
        s1 += 1.0 / (lam[i] - lam[j]);
        s2 += 1.0 / ((lam[i] - lam[j]) * (lam[i] - lam[j]));
      }
      scale += 2.0 * lam[i] * (1.0 - lam[i]) * (s1 * s1 + s2);
    }
    scale *= std::abs(vandermonde(lam.span()));
    vd_err = std::max(vd_err, std::abs(vc.lhs - vc.rhs) / std::max({1e-300, scale, std::abs(vc.rhs)}));
    // |h| <= 1 and lambda gaps lose relative accuracy near collisions, so
    // the two forms are compared on the absolute scale max(1, |h|).
    const double hp = h_function(phi);
    const double hl = h_function_lambda(lam);
    h_err = std::max(h_err, std::abs(hp - hl) / std::max({1.0, std::abs(hp), std::abs(hl)}));
  }
  add("vandermonde_identity", vd_err, 1e-10, vd_err < 1e-10);
  add("h_product_vs_lambda_form", h_err, 1e-12, h_err < 1e-12);

  return SuiteResult{"appendix", ok, Json{{"suite", "appendix"}, {"m", m}, {"passed", ok}, {"checks", std::move(checks)}}};
}

struct HittingGridOptions {
  std::size_t paths = 500;
  double epsilon = 1e-3;
  SimConfig cfg = [] {
    SimConfig c;
    c.horizon = 10.0;
    c.seed = 1;
    return c;
  }();
  unsigned threads = 1;
};

/// The threshold grid at m = 2: collisions at beta = 0.5 and 2 (p = q = 4),
/// the lower wall at beta = 1 with p = 1.6 and p = 4 (q = 4), and the upper
/// wall at the swapped parameters compared to the lower wall within 3 SE.
inline SuiteResult hitting_grid_suite(const HittingGridOptions& opt) {
  Json cells = Json::array();
  bool ok = true;
  auto cell = [&](const std::string& name, HittingKind kind, const ModelParams& params, const std::string& expect,
                  auto&& pass) {
    const HittingReport rep = estimate_hitting(kind, params, opt.cfg, opt.epsilon, opt.paths, std::nullopt, opt.threads);
    const bool passed = pass(rep);
    Json j = to_json(rep);
    j["cell"] = name;
    j["expectation"] = expect;
    j["passed"] = passed;
    cells.push_back(std::move(j));
    ok = ok && passed;
    return rep;
  };
  cell("collision_beta_0.5", HittingKind::Collision, ModelParams(0.5, 4, 4, 2), "fraction > 0.9",
       [](const HittingReport& r) { return r.hit_fraction > 0.9; });
  cell("collision_beta_2", HittingKind::Collision, ModelParams(2, 4, 4, 2), "fraction = 0",
       [](const HittingReport& r) { return r.hits == 0; });
  const auto low_hit = cell("lower_p_1.6", HittingKind::LowerBoundary, ModelParams(1, 1.6, 4, 2), "fraction > 0.9",
                            [](const HittingReport& r) { return r.hit_fraction > 0.9; });
  const auto low_miss = cell("lower_p_4", HittingKind::LowerBoundary, ModelParams(1, 4, 4, 2), "fraction < 0.05",
                             [](const HittingReport& r) { return r.hit_fraction < 0.05; });
  auto mirrors = [](const HittingReport& lower) {
    return [lower](const HittingReport& r) {
      const double se = std::sqrt(lower.standard_error() * lower.standard_error() +
                                  r.standard_error() * r.standard_error());
      return std::abs(r.hit_fraction - lower.hit_fraction) <= 3.0 * se;
    };
  };
  cell("upper_q_1.6", HittingKind::UpperBoundary, ModelParams(1, 4, 1.6, 2), "matches lower_p_1.6 within 3 SE",
       mirrors(low_hit));
  cell("upper_q_4", HittingKind::UpperBoundary, ModelParams(1, 4, 4, 2), "matches lower_p_4 within 3 SE",
       mirrors(low_miss));
  return SuiteResult{"hitting", ok,
                     Json{{"suite", "hitting"},
                          {"preset", "proposition-grid"},
                          {"epsilon_hit", opt.epsilon},
                          {"horizon", opt.cfg.horizon},
                          {"dt", opt.cfg.dt},
                          {"paths", opt.paths},
                          {"seed", opt.cfg.seed},
                          {"passed", ok},
                          {"cells", std::move(cells)}}};
}

struct StationaryOptions {
  std::size_t paths = 2000;
  double horizon = 3.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Normalizers against closed forms, and long-horizon ensembles against the
/// stationary law (m = 1 by KS, m = 2, beta = 2 by moments).
inline SuiteResult stationary_suite(const StationaryOptions& opt) {
  Json checks = Json::array();
  bool ok = true;
  auto add = [&](Json j, bool passed) {
    j["passed"] = passed;
    checks.push_back(std::move(j));
    ok = ok && passed;
  };
  {
    const ModelParams params(1.5, 2.0, 3.0, 1);
    const SpectralExponents e = spectral_exponents(params);
    const double exact = std::exp(-detail::log_beta(e.r + 1.0, e.s + 1.0));
    const double num = stationary_normalizer(params);
    const double err = std::abs(num / exact - 1.0);
    add(Json{{"name", "normalizer_m1_vs_beta_function"}, {"value", num}, {"exact", exact}, {"relative_error", err}},
        err < 1e-10);
  }
  {
    const ModelParams params(2.0, 2.5, 3.0, 2);
    const SpectralExponents e = spectral_exponents(params);
    const JacobiBasis basis(e.r, e.s, 1);
    const double exact = std::exp(2.0 * basis.log_leading_coefficient(1) - 2.0 * detail::log_beta(e.r + 1.0, e.s + 1.0));
    const double num = stationary_normalizer(params);
    const double err = std::abs(num / exact - 1.0);
    add(Json{{"name", "normalizer_m2_beta2_vs_determinantal"}, {"value", num}, {"exact", exact}, {"relative_error", err}},
        err < 1e-8);
  }
  SimConfig cfg;
  cfg.dt = opt.dt;
  cfg.horizon = opt.horizon;
  cfg.seed = opt.seed;
  {
    const ModelParams params(2.0, 3.0, 2.0, 1);
    const auto rep = stationary_ks_m1(params, 0.2, cfg, opt.paths, opt.threads, 1.63 / std::sqrt(double(opt.paths)));
    Json j = to_json(rep);
    j["name"] = "m1_long_horizon_ks_vs_beta";
    add(std::move(j), rep.passed);
  }
  {
    const ModelParams params(2.0, 3.0, 2.5, 2);
    for (const auto& c : stationary_moment_check(params, LambdaPoint({0.7, 0.3}), cfg, opt.paths, opt.threads)) {
      add(to_json(c), c.passed);
    }
  }
  return SuiteResult{"stationary", ok,
                     Json{{"suite", "stationary"},
                          {"paths", opt.paths},
                          {"horizon", opt.horizon},
                          {"dt", opt.dt},
                          {"seed", opt.seed},
                          {"passed", ok},
                          {"checks", std::move(checks)}}};
}

struct DensitySimOptions {
  std::size_t paths_m1 = 100000;
  std::size_t paths_m2 = 10000;
  double t = 0.5;
  double dt = 1e-4;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// m = 1 (beta = 2, p = q = 1, so r = s = 0) from theta = 0.3 by KS, and m = 2,
/// beta = 2, r = s = 0 from theta = (0.7, 0.3) by a 20 x 20 histogram in L1.
inline SuiteResult density_vs_sim_suite(const DensitySimOptions& opt) {
  SimConfig cfg;
  cfg.dt = opt.dt;
  cfg.seed = opt.seed;
  const auto r1 = density_vs_simulation_m1(ModelParams(2.0, 1.0, 1.0, 1), 0.3, opt.t, opt.paths_m1, cfg, opt.threads);
  const auto r2 = density_vs_simulation_m2(ModelParams(2.0, 2.0, 2.0, 2), LambdaPoint({0.7, 0.3}), opt.t,
                                           opt.paths_m2, cfg, opt.threads);
  Json j1 = to_json(r1);
  j1["name"] = "m1_ks";
  Json j2 = to_json(r2);
  j2["name"] = "m2_beta2_l1";
  const bool ok = r1.passed && r2.passed;
  return SuiteResult{"density-vs-sim", ok,
                     Json{{"suite", "density-vs-sim"},
                          {"dt", opt.dt},
                          {"seed", opt.seed},
                          {"passed", ok},
                          {"checks", Json::array({std::move(j1), std::move(j2)})}}};
}

}  // namespace bjl
