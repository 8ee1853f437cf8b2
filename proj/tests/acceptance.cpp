// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Usage: acceptance <path-to-bjl-cli> [work-dir]

#include <sys/wait.h>

#include <boost/rational.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bjl/bjl.hpp"

using namespace bjl;
namespace fs = std::filesystem;

namespace {

// tanh-sinh nodes that round onto an endpoint, where negative exponents blow up
bool inside(double x) { return x > 0.0 && x < 1.0; }

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double x, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

Outcome drift_cross_oracle() {
  detail::Sampler rng(101);
  double worst = 0.0;
  for (int m = 1; m <= 5; ++m) {
    for (int n = 0; n < 1000; ++n) {
      const Multiplicities k{rng.uniform(-2.0, 4.0), rng.uniform(-1.0, 6.0), rng.uniform(0.05, 3.0)};
      const AlcovePoint phi = rng.alcove(m);
      const auto a = drift_root_sum(phi, k);
      const auto b = drift_explicit(phi, k);
      for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    }
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst)};
}

Outcome trig_suite() {
  const auto checks = trig_identity_suite(10000, 202, 1e-12);
  std::string d;
  for (const auto& c : checks) d += c.name + "=" + fmt(c.max_error) + " ";
  return {checks.size() == 4 && all_passed(checks), d};
}

Outcome orthonormality() {
  const NodeSet rule = tanh_sinh(1201, 6.5);
  const double grid[] = {-0.5, 0.0, 1.5};
  const int N = 30;
  double worst = 0.0;
  for (double r : grid) {
    for (double s : grid) {
      const JacobiBasis b(r, s, N);
      std::vector<std::vector<double>> vals(rule.size());
      std::vector<double> w(rule.size());
      for (std::size_t k = 0; k < rule.size(); ++k) {
        vals[k] = b.evaluate_all(N, rule.x[k]);
        w[k] = rule.w[k] * b.weight(rule.x[k], rule.xc[k]);
      }
      for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= i; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < rule.size(); ++k) acc += w[k] * vals[k][i] * vals[k][j];
          worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
        }
      }
    }
  }
  return {worst <= 1e-10, "max |G - I| " + fmt(worst) + " over 9 (r,s), degree <= 30"};
}

Outcome univariate_semigroup() {
  const NodeSet rule = tanh_sinh(801);
  double norm_err = 0.0, ck_err = 0.0, rev_err = 0.0;
  for (auto [r, s] : {std::pair{0.0, 0.0}, std::pair{-0.5, 1.5}, std::pair{2.0, -0.3}}) {
    const JacobiBasis basis(r, s, 80);
    for (double theta : {0.05, 0.3, 0.8}) {
      for (double t : {0.05, 0.3, 1.0}) {
        const double mass = integrate(rule, [&](double x, double) { return inside(x) ? univariate_density(theta, x, t, basis).value : 0.0; });
        norm_err = std::max(norm_err, std::abs(mass - 1.0));
      }
      for (double lam : {0.1, 0.55, 0.9}) {
        const double two = integrate(rule, [&](double mu, double) {
          if (!inside(mu)) return 0.0;
          return univariate_density(theta, mu, 0.3, basis).value * univariate_density(mu, lam, 0.3, basis).value;
        });
        const double one = univariate_density(theta, lam, 0.6, basis).value;
        ck_err = std::max(ck_err, std::abs(two - one) / std::max(1.0, one));
        const double lhs = basis.weight(theta) * univariate_density(theta, lam, 0.3, basis).value;
        const double rhs = basis.weight(lam) * univariate_density(lam, theta, 0.3, basis).value;
        rev_err = std::max(rev_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
    }
  }
  return {norm_err <= 1e-8 && ck_err <= 1e-8 && rev_err <= 1e-12,
          "normalization " + fmt(norm_err) + ", Chapman-Kolmogorov " + fmt(ck_err) + ", reversibility " + fmt(rev_err)};
}

Outcome beta2_cross_form() {
  double worst = 0.0;
  for (double rs : {0.0, 0.5}) {
    const JacobiBasis basis(rs, rs, 60);
    for (double a = 0.05; a < 1.0; a += 0.15) {
      for (double b = 0.02; b < a; b += 0.17) {
        for (const auto& th : {std::vector<double>{0.7, 0.3}, std::vector<double>{0.95, 0.05}, std::vector<double>{0.5, 0.45}}) {
          const LambdaPoint theta(th);
          const LambdaPoint lam({a, b});
          const double km = km_density_beta2(theta, lam, 0.5, basis).value;
          const double ps = partition_sum_density_beta2(theta, lam, 0.5, basis).value;
          worst = std::max(worst, std::abs(km - ps) / std::max(1.0, std::abs(km)));
        }
      }
    }
  }
  using Q = boost::rational<long long>;
  std::size_t checked = 0, bad = 0;
  const Q grid[] = {Q(0), Q(1, 2), Q(3, 2), Q(2, 3), Q(-1, 3), Q(5)};
  for (int m = 1; m <= 3; ++m) {
    for (const Q& r : grid) {
      for (const Q& s : grid) {
        const Q c = km_constant_c<Q>(m, Q(2) * (r + 1), Q(2) * (s + 1));
        for (const Partition& tau : partitions(m, 8)) {
          Q lhs = c / 2;
          for (int n : tau.shifted()) lhs += Q(n) * (Q(n) + r + s + 1);
          ++checked;
          if (lhs != tau_eigenvalue<Q>(tau, r, s, Q(2))) ++bad;
        }
      }
    }
  }
  return {worst <= 1e-8 && bad == 0,
          "max relative difference " + fmt(worst) + "; exponent identity " + std::to_string(checked - bad) + "/" +
              std::to_string(checked) + " exact"};
}

Outcome density_vs_sim() {
  const SuiteResult r = density_vs_sim_suite(DensitySimOptions{});
  const Json& m1 = r.report["checks"][0];
  const Json& m2 = r.report["checks"][1];
  return {r.passed, "m=1 KS " + fmt(m1["distance"].get<double>()) + " (< 0.01), m=2 L1 " +
                        fmt(m2["distance"].get<double>()) + " (< 0.1)"};
}

Outcome hitting_grid() {
  const SuiteResult r = hitting_grid_suite(HittingGridOptions{});
  std::string d;
  for (const auto& c : r.report["cells"]) {
    d += c["cell"].get<std::string>() + "=" + fmt(c["hit_fraction"].get<double>()) + (c["passed"].get<bool>() ? " " : "(x) ");
  }
  return {r.passed, d};
}

Outcome rank_one() {
  SimConfig cfg;
  cfg.horizon = 5.0;
  cfg.seed = 303;
  const auto low = estimate_rank_one_hits(1.0, 3.0, 0.5, cfg, 1000);
  const auto high = estimate_rank_one_hits(3.0, 3.0, 0.5, cfg, 1000);
  return {low.fraction_zero() > 0.5 && high.hit_zero == 0,
          "d=1 hit-0 fraction " + fmt(low.fraction_zero()) + ", d=3 hits " + std::to_string(high.hit_zero) + "/1000"};
}

Outcome appendix() {
  bool ok = true;
  std::string d;
  for (int m = 1; m <= 4; ++m) {
    AppendixOptions o;
    o.m = m;
    o.bound_points = 10000;
    const SuiteResult r = appendix_suite(o);
    ok = ok && r.passed;
    d += "m=" + std::to_string(m) + (r.passed ? " ok " : " FAILED ");
  }
  const double spot = laplacian_ratio_closed_form(AlcovePoint({kPi / 4.0}));
  ok = ok && std::abs(spot + 5.0) < 1e-12;
  return {ok, d + "spot " + fmt(spot, "%.15g")};
}

int sh(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  fs::create_directories(work);
  const std::string q = "'" + cli + "'";
  struct Run {
    std::string name;
    std::string args;
  };
  const std::vector<Run> runs{
      {"simulate.csv", "simulate --beta 2 --p 4 --q 4.5 --m 3 --dt 1e-3 --horizon 1 --paths 20 --seed 9"},
      {"simulate_lambda.json", "simulate --beta 2 --p 3 --q 2.5 --m 2 --coords lambda --format json --paths 5 --horizon 0.5 --dt 1e-3"},
      {"density.csv", "density --mode partition2 --r 0.5 --s 0 --theta 0.8,0.2 --t 0.3 --grid 16"},
      {"hitting.json", "verify --suite hitting --kind lower --beta 1 --p 1.6 --q 4 --m 2 --paths 30 --horizon 2 --dt 1e-3"},
  };
  std::string d;
  bool ok = true;
  for (const auto& r : runs) {
    const fs::path first = work / ("first_" + r.name);
    const fs::path manifest = work / ("first_" + r.name + ".manifest.json");
    const std::string redirect = " 2>/dev/null";
    // exit 1 is a failed verification verdict, which still writes output
    bool ran = sh(q + " " + r.args + " --out '" + first.string() + "'" + redirect) <= 1;
    const std::string base = slurp(first);
    ran = ran && !base.empty();
    bool same = ran;
    for (int k = 0; k < 2 && same; ++k) {
      const fs::path again = work / ("replay" + std::to_string(k) + "_" + r.name);
      ran = sh(q + " replay '" + manifest.string() + "' --out '" + again.string() + "'" + redirect) <= 1;
      same = ran && slurp(again) == base;
    }
    ok = ok && same;
    d += r.name + (same ? " identical " : ran ? " DIFFERS " : " FAILED-TO-RUN ");
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <bjl-cli> [work-dir]\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "bjl_acceptance";

  const std::vector<Criterion> criteria{
      {1, "drift cross-oracle", 1.0, drift_cross_oracle},
      {2, "trig identity suite", 1.0, trig_suite},
      {3, "orthonormality", 5.0, orthonormality},
      {4, "univariate semigroup", 10.0, univariate_semigroup},
      {5, "beta=2 cross-form", 30.0, beta2_cross_form},
      {6, "density vs simulation", 300.0, density_vs_sim},
      {7, "hitting thresholds", 600.0, hitting_grid},
      {8, "rank-one classification", 60.0, rank_one},
      {9, "appendix Laplacian", 60.0, appendix},
      {10, "determinism", 600.0, [&] { return determinism(cli, work); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.passed && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << "  " << c.name << "  [" << fmt(secs, "%.2f")
              << " s / " << fmt(c.limit_seconds, "%.0f") << " s" << (in_time ? "" : " over budget") << "]  " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
