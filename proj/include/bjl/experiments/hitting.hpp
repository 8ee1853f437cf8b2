#pragma once

// Monte Carlo first-passage estimates for the alcove walls and for the
// scalar Jacobi process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/dynamics.hpp"
#include "bjl/errors.hpp"
#include "bjl/parallel.hpp"
#include "bjl/rng.hpp"
#include "bjl/roots.hpp"

namespace bjl {

enum class HittingKind { Collision, LowerBoundary, UpperBoundary };

inline const char* to_string(HittingKind kind) {
  switch (kind) {
    case HittingKind::Collision:
      return "collision";
    case HittingKind::LowerBoundary:
      return "lower_boundary";
    case HittingKind::UpperBoundary:
      return "upper_boundary";
  }
  return "unknown";
}

enum class Verdict { Consistent, Inconsistent, NoPrediction };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent:
      return "consistent";
    case Verdict::Inconsistent:
      return "inconsistent";
    case Verdict::NoPrediction:
      return "no_prediction";
  }
  return "unknown";
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for k successes out of n.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.96) {
  if (n == 0) throw ParameterError("wilson_interval needs n >= 1");
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  return Interval{std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Sufficient conditions for a.s. finite hitting:
/// collision for 0 < beta < 1, lower wall for 0 < p - (m-1) < 2/beta,
/// upper wall for 0 < q - (m-1) < 2/beta.
inline bool proposition_predicts_hit(HittingKind kind, const ModelParams& params) {
  const double b = params.beta();
  const double mm = params.m() - 1;
  switch (kind) {
    case HittingKind::Collision:
      return params.m() >= 2 && b < 1.0;
    case HittingKind::LowerBoundary:
      return params.p() - mm > 0.0 && params.p() - mm < 2.0 / b;
    case HittingKind::UpperBoundary:
      return params.q() - mm > 0.0 && params.q() - mm < 2.0 / b;
  }
  return false;
}

struct HittingReport {
  HittingKind kind = HittingKind::Collision;
  ModelParams params{2.0, 4.0, 4.0, 2};
  std::size_t n_paths = 0;
  std::size_t hits = 0;
  double horizon = 0.0;
  double dt = 0.0;
  double epsilon_hit = 0.0;
  double hit_fraction = 0.0;
  Interval wilson;
  double mean_hit_time = 0.0;  // over hitting paths; 0 when none hit
  std::size_t exhausted = 0;   // paths whose hit was declared by exhausted halvings
  bool predicted_hit = false;
  Verdict verdict = Verdict::NoPrediction;

  /// Standard error sqrt(f(1-f)/n).
  double standard_error() const {
    return std::sqrt(hit_fraction * (1.0 - hit_fraction) / static_cast<double>(n_paths));
  }
};

namespace detail {

inline double hitting_distance(HittingKind kind, std::span<const double> phi) {
  switch (kind) {
    case HittingKind::Collision: {
      double g = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < phi.size(); ++i) g = std::min(g, phi[i] - phi[i + 1]);
      return g;
    }
    case HittingKind::LowerBoundary:
      return phi.back();
    case HittingKind::UpperBoundary:
      return kHalfPi - phi.front();
  }
  return 0.0;
}

struct HitObserver : PhiObserver {
  HittingKind kind;
  double eps;
  std::optional<double> hit_time;

  HitObserver(HittingKind k, double e) : kind(k), eps(e) {}

  bool on_accept(double t, std::span<const double> phi) {
    if (hitting_distance(kind, phi) < eps) {
      hit_time = t;
      return false;
    }
    return true;
  }
};

struct PathHit {
  bool hit = false;
  bool exhausted = false;
  double time = 0.0;
};

}  // namespace detail

/// Fraction of angular paths whose collision gap, phi_m, or pi/2 - phi_1 drops
/// below epsilon_hit before cfg.horizon. A step that exhausts its halvings
/// counts as a hit at that time. Path i uses seed stream_seed(cfg.seed, i).
inline HittingReport estimate_hitting(HittingKind kind, const ModelParams& params, const SimConfig& cfg,
                                      double epsilon_hit, std::size_t n_paths,
                                      std::optional<AlcovePoint> start = std::nullopt, unsigned threads = 1) {
  cfg.validate();
  if (n_paths < 1) throw ParameterError("n_paths must be at least 1");
  if (!(epsilon_hit > cfg.boundary_tol)) throw ParameterError("epsilon_hit must exceed boundary_tol");
  if (kind == HittingKind::Collision && params.m() < 2) throw ParameterError("collisions need m >= 2");
  const AlcovePoint x0 = start ? *start : alcove_reference_point(params.m());
  detail::check_dimension(x0.m(), params.m(), "estimate_hitting");
  const Multiplicities k = multiplicities(params);
  std::vector<detail::PathHit> results(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    try {
      GaussianSource rng(stream_seed(cfg.seed, i));
      detail::HitObserver obs(kind, epsilon_hit);
      if (detail::hitting_distance(kind, x0.span()) < epsilon_hit) {
        results[i] = detail::PathHit{true, false, 0.0};
        return;
      }
      const auto run = detail::integrate_phi(x0.span(), k, cfg, cfg.boundary_tol, rng, obs);
      if (obs.hit_time) {
        results[i] = detail::PathHit{true, false, *obs.hit_time};
      } else if (run.status == detail::Advance::Exhausted) {
        results[i] = detail::PathHit{true, true, run.time};
      }
    } catch (const std::exception& e) {
      throw EnsembleError(i, e.what(), std::current_exception());
    }
  });
  HittingReport rep;
  rep.kind = kind;
  rep.params = params;
  rep.n_paths = n_paths;
  rep.horizon = cfg.horizon;
  rep.dt = cfg.dt;
  rep.epsilon_hit = epsilon_hit;
  double tsum = 0.0;
  for (const auto& r : results) {
    if (!r.hit) continue;
    ++rep.hits;
    if (r.exhausted) ++rep.exhausted;
    tsum += r.time;
  }
  rep.hit_fraction = static_cast<double>(rep.hits) / static_cast<double>(n_paths);
  rep.wilson = wilson_interval(rep.hits, n_paths);
  rep.mean_hit_time = rep.hits > 0 ? tsum / static_cast<double>(rep.hits) : 0.0;
  rep.predicted_hit = proposition_predicts_hit(kind, params);
  if (rep.predicted_hit) rep.verdict = rep.hit_fraction > 0.9 ? Verdict::Consistent : Verdict::Inconsistent;
  return rep;
}

struct RankOneReport {
  double d = 0.0;
  double dprime = 0.0;
  double start = 0.5;
  std::size_t n_paths = 0;
  std::size_t hit_zero = 0;
  std::size_t hit_one = 0;
  double horizon = 0.0;

  double fraction_zero() const { return static_cast<double>(hit_zero) / static_cast<double>(n_paths); }
  double fraction_one() const { return static_cast<double>(hit_one) / static_cast<double>(n_paths); }
};

/// Boundary hits of the scalar Jacobi process over cfg.horizon.
inline RankOneReport estimate_rank_one_hits(double d, double dprime, double start, const SimConfig& cfg,
                                            std::size_t n_paths, unsigned threads = 1) {
  if (n_paths < 1) throw ParameterError("n_paths must be at least 1");
  std::vector<int> kind(n_paths, 0);
  SimConfig base = cfg;
  base.keep_path = false;
  parallel_for(n_paths, threads, [&](std::size_t i) {
    SimConfig c = base;
    c.seed = stream_seed(cfg.seed, i);
    try {
      const PathSample path = simulate_rank_one(start, d, dprime, c);
      if (path.hit) kind[i] = path.hit->kind == "zero" ? 1 : 2;
    } catch (const std::exception& e) {
      throw EnsembleError(i, e.what(), std::current_exception());
    }
  });
  RankOneReport rep{d, dprime, start, n_paths, 0, 0, cfg.horizon};
  for (int k : kind) {
    if (k == 1) ++rep.hit_zero;
    if (k == 2) ++rep.hit_one;
  }
  return rep;
}

}  // namespace bjl
