#pragma once

// Euler-Maruyama integrators for the angular process, the eigenvalue process
// and the rank-one Jacobi diffusion.
//
// The angular scheme is the reference: a proposal that leaves the alcove (or
// whose drift exceeds 1/(10 boundary_tol)) is rejected and the step is retried
// as two half steps, recursively, up to max_halvings levels. The two half
// increments are drawn from the Brownian bridge pinned to the rejected
// increment, so the driving Brownian path is refined rather than replaced.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/errors.hpp"
#include "bjl/parallel.hpp"
#include "bjl/rng.hpp"
#include "bjl/roots.hpp"

namespace bjl {

enum class Scheme { PhiEuler, LambdaEuler };

struct SimConfig {
  double dt = 1e-4;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double boundary_tol = 1e-9;
  int max_halvings = 40;
  Scheme scheme = Scheme::PhiEuler;
  /// When false only the initial and final states are recorded.
  bool keep_path = true;
  /// Log every rejected proposal as a WallCrossing / DriftLimit event. They
  /// are always counted in PathSample::rejections.
  bool log_rejections = false;

  void validate() const {
    if (!(std::isfinite(dt) && dt > 0.0)) throw ParameterError("dt must be positive");
    if (!(std::isfinite(horizon) && horizon >= 0.0)) throw ParameterError("horizon must be non-negative");
    if (!(std::isfinite(boundary_tol) && boundary_tol > 0.0)) throw ParameterError("boundary_tol must be positive");
    if (max_halvings < 0 || max_halvings > 60) throw ParameterError("max_halvings must lie in [0, 60]");
  }

  /// Number of recorded steps; the last one is shortened to land on horizon.
  std::size_t step_count() const {
    if (horizon == 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  }

  double time_at(std::size_t k) const {
    return k >= step_count() ? horizon : static_cast<double>(k) * dt;
  }
};

enum class Coordinates { Phi, Lambda, RankOne };

enum class EventKind {
  WallStart,     // started on a wall; first step is a deterministic inward push
  WallCrossing,  // a rejected proposal left the alcove (logged on request)
  DriftLimit,    // a rejected proposal had too large a drift (logged on request)
  Clamp,         // lambda scheme: coordinate clamped back into [0, 1]
  Reorder,       // lambda scheme: ordering repaired by sorting
  Collision,     // lambda scheme: two coordinates within 1e-15
};

inline const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::WallStart:
      return "wall_start";
    case EventKind::WallCrossing:
      return "wall_crossing";
    case EventKind::DriftLimit:
      return "drift_limit";
    case EventKind::Clamp:
      return "clamp";
    case EventKind::Reorder:
      return "reorder";
    case EventKind::Collision:
      return "collision";
  }
  return "unknown";
}

inline const char* to_string(Coordinates c) {
  switch (c) {
    case Coordinates::Phi:
      return "phi";
    case Coordinates::Lambda:
      return "lambda";
    case Coordinates::RankOne:
      return "jacobi";
  }
  return "unknown";
}

struct PathEvent {
  double time = 0.0;
  EventKind kind = EventKind::WallStart;
  std::vector<std::string> walls;  // root names, or coordinate labels for the lambda scheme

  friend bool operator==(const PathEvent&, const PathEvent&) = default;
};

struct HitRecord {
  double time = 0.0;
  std::string kind;

  friend bool operator==(const HitRecord&, const HitRecord&) = default;
};

struct PathSample {
  Coordinates coords = Coordinates::Phi;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<PathEvent> events;
  std::optional<HitRecord> hit;
  std::size_t rejections = 0;

  const std::vector<double>& final_state() const { return states.back(); }

  friend bool operator==(const PathSample&, const PathSample&) = default;
};

namespace detail {

enum class Reject { None, LeftAlcove, DriftLimit };
enum class Advance { Ok, Stopped, Exhausted };

/// Hooks called by integrate_phi. Derive and shadow the ones you need.
struct PhiObserver {
  void on_wall_start(double /*t*/, std::span<const double> /*phi*/) {}
  /// After every accepted (sub)step; return false to stop the path.
  bool on_accept(double /*t*/, std::span<const double> /*phi*/) { return true; }
  void on_reject(double /*t*/, Reject /*why*/, std::span<const double> /*proposal*/) {}
  /// At the end of every full step k (time t).
  void on_step(std::size_t /*k*/, double /*t*/, std::span<const double> /*phi*/) {}
};

class PhiIntegrator {
 public:
  PhiIntegrator(const Multiplicities& k, std::size_t m, double accept_margin, double drift_cap,
                int max_halvings)
      : k_(k),
        margin_(accept_margin),
        cap_(drift_cap),
        max_halvings_(max_halvings),
        phi_(m),
        drift_(m),
        noise_(m),
        prop_(m),
        prop_drift_(m) {}

  std::span<const double> state() const noexcept { return phi_; }
  std::span<const double> last_proposal() const noexcept { return prop_; }

  /// Sets the state; false if it is not admissible (on/near a wall or the
  /// drift is over the cap).
  bool reset(std::span<const double> phi) {
    std::copy(phi.begin(), phi.end(), phi_.begin());
    if (wall_margin(phi_) <= margin_) return false;
    explicit_drift(phi_, k_, drift_);
    return drift_ok(drift_);
  }

  /// Overwrites the state without checks beyond a drift refresh.
  void force(std::span<const double> phi) {
    std::copy(phi.begin(), phi.end(), phi_.begin());
    explicit_drift(phi_, k_, drift_);
  }

  /// Proposes phi + drift h + noise; accepts it in place when admissible.
  Reject try_step(double h, std::span<const double> noise) {
    for (std::size_t i = 0; i < phi_.size(); ++i) prop_[i] = phi_[i] + drift_[i] * h + noise[i];
    return try_accept_proposal();
  }

  Reject try_accept_proposal() {
    if (!(wall_margin(prop_) > margin_)) return Reject::LeftAlcove;
    explicit_drift(prop_, k_, prop_drift_);
    if (!drift_ok(prop_drift_)) return Reject::DriftLimit;
    phi_.swap(prop_);
    drift_.swap(prop_drift_);
    return Reject::None;
  }

  std::vector<double>& proposal_buffer() noexcept { return prop_; }

  template <class Observer>
  Advance advance(double t, double h, GaussianSource& rng, Observer& obs) {
    rng.fill(noise_, std::sqrt(h));
    return advance_rec(t, h, noise_, 0, rng, obs);
  }

 private:
  bool drift_ok(std::span<const double> d) const {
    for (double x : d) {
      if (!(std::abs(x) <= cap_)) return false;
    }
    return true;
  }

  // A rejected increment dw over [t, t + h] is split by the Brownian bridge:
  // dw1 = dw/2 + (sqrt(h)/2) Z, dw2 = dw - dw1.
  template <class Observer>
  Advance advance_rec(double t, double h, std::span<const double> dw, int depth, GaussianSource& rng,
                      Observer& obs) {
    const Reject why = try_step(h, dw);
    if (why == Reject::None) {
      return obs.on_accept(t + h, std::span<const double>(phi_)) ? Advance::Ok : Advance::Stopped;
    }
    obs.on_reject(t, why, std::span<const double>(prop_));
    if (depth >= max_halvings_) return Advance::Exhausted;
    const std::size_t m = dw.size();
    std::vector<double> halves(2 * m);
    const double sd = std::sqrt(h) / 2.0;
    for (std::size_t i = 0; i < m; ++i) {
      halves[i] = dw[i] / 2.0 + sd * rng.next();
      halves[m + i] = dw[i] - halves[i];
    }
    const double half = h / 2.0;
    const std::span<const double> both(halves);
    const Advance first = advance_rec(t, half, both.first(m), depth + 1, rng, obs);
    if (first != Advance::Ok) return first;
    return advance_rec(t + half, half, both.subspan(m), depth + 1, rng, obs);
  }

  Multiplicities k_;
  double margin_;
  double cap_;
  int max_halvings_;
  std::vector<double> phi_;
  std::vector<double> drift_;
  std::vector<double> noise_;
  std::vector<double> prop_;
  std::vector<double> prop_drift_;
};

struct PhiRunResult {
  Advance status = Advance::Ok;
  double time = 0.0;                 // time reached (stop or failure time)
  std::vector<double> last_proposal;  // set on exhaustion
};

/// Integrates the angular SDE on the time grid of cfg. A start on (or within
/// accept_margin of) a wall is moved by a deterministic push of length
/// sqrt(dt) toward the alcove reference point, plus noise when the noisy
/// point is still admissible; that push is the first step.
template <class Observer>
PhiRunResult integrate_phi(std::span<const double> start, const Multiplicities& k, const SimConfig& cfg,
                           double accept_margin, GaussianSource& rng, Observer& obs) {
  const std::size_t m = start.size();
  PhiIntegrator integ(k, m, accept_margin, 1.0 / (10.0 * cfg.boundary_tol), cfg.max_halvings);
  const std::size_t n = cfg.step_count();
  std::size_t first_step = 1;
  if (!integ.reset(start) && n > 0) {
    obs.on_wall_start(0.0, start);
    const AlcovePoint ref = alcove_reference_point(static_cast<int>(m));
    std::vector<double> dir(m);
    double dist = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      dir[i] = ref[i] - start[i];
      dist += dir[i] * dir[i];
    }
    dist = std::sqrt(dist);
    const double h = cfg.time_at(1);
    const double len = std::min(std::sqrt(h), dist / 2.0);
    std::vector<double> pushed(m);
    for (std::size_t i = 0; i < m; ++i) pushed[i] = start[i] + len * dir[i] / dist;
    std::vector<double>& prop = integ.proposal_buffer();
    for (std::size_t i = 0; i < m; ++i) prop[i] = pushed[i] + std::sqrt(h) * rng.next();
    if (integ.try_accept_proposal() != Reject::None) integ.force(pushed);
    if (!obs.on_accept(h, integ.state())) return PhiRunResult{Advance::Stopped, h, {}};
    obs.on_step(1, h, integ.state());
    first_step = 2;
  }
  for (std::size_t step = first_step; step <= n; ++step) {
    const double t0 = cfg.time_at(step - 1);
    const double t1 = cfg.time_at(step);
    const Advance a = integ.advance(t0, t1 - t0, rng, obs);
    if (a == Advance::Stopped) return PhiRunResult{a, t1, {}};
    if (a == Advance::Exhausted) {
      const auto p = integ.last_proposal();
      return PhiRunResult{a, t0, std::vector<double>(p.begin(), p.end())};
    }
    obs.on_step(step, t1, integ.state());
  }
  return PhiRunResult{Advance::Ok, cfg.horizon, {}};
}

/// Records full steps and discarded proposals into a PathSample.
struct PathRecorder : PhiObserver {
  PathSample& path;
  std::size_t n_steps;
  bool keep_path;
  bool log_rejections = false;

  PathRecorder(PathSample& p, std::size_t n, bool keep) : path(p), n_steps(n), keep_path(keep) {}

  void on_wall_start(double t, std::span<const double> phi) {
    PathEvent ev{t, EventKind::WallStart, {}};
    for (const Root& w : classify_position(phi, 1e-9).walls) ev.walls.push_back(w.name());
    path.events.push_back(std::move(ev));
  }
  bool on_accept(double, std::span<const double>) { return true; }
  void on_reject(double t, Reject why, std::span<const double> proposal) {
    ++path.rejections;
    if (!log_rejections) return;
    if (why == Reject::LeftAlcove) {
      PathEvent ev{t, EventKind::WallCrossing, {}};
      for (const Root& w : classify_position(proposal, 0.0).walls) ev.walls.push_back(w.name());
      path.events.push_back(std::move(ev));
    } else {
      path.events.push_back(PathEvent{t, EventKind::DriftLimit, {}});
    }
  }
  void on_step(std::size_t k, double t, std::span<const double> phi) {
    if (keep_path || k == n_steps) {
      path.times.push_back(t);
      path.states.emplace_back(phi.begin(), phi.end());
    }
  }
};

inline void check_dimension(int got, int want, const char* what) {
  if (got != want) throw ParameterError(std::string(what) + ": dimension does not match m");
}

}  // namespace detail

/// One Euler-Maruyama proposal phi + noise + drift(phi) dt. Returns nullopt
/// when the proposal leaves the open alcove (margin boundary_tol) or its drift
/// exceeds 1/(10 boundary_tol); the caller then halves dt.
inline std::optional<AlcovePoint> step_phi(const AlcovePoint& state, const Multiplicities& k, double dt,
                                           std::span<const double> noise, double boundary_tol = 1e-9) {
  if (noise.size() != state.values().size()) throw ParameterError("noise dimension mismatch");
  if (dt < 0.0) throw ParameterError("dt must be non-negative");
  detail::check_not_singular(state.span(), kDefaultSingularTol);
  detail::PhiIntegrator integ(k, state.values().size(), boundary_tol, 1.0 / (10.0 * boundary_tol), 0);
  integ.force(state.span());
  if (integ.try_step(dt, noise) != detail::Reject::None) return std::nullopt;
  const auto s = integ.state();
  return AlcovePoint(std::vector<double>(s.begin(), s.end()));
}

/// Simulates the angular process. Recorded states are strictly inside the
/// alcove (margin boundary_tol); discarded proposals are logged as events.
inline PathSample simulate_phi(const AlcovePoint& start, const ModelParams& params, const SimConfig& cfg) {
  cfg.validate();
  detail::check_dimension(start.m(), params.m(), "simulate_phi");
  PathSample path;
  path.coords = Coordinates::Phi;
  path.times.push_back(0.0);
  path.states.push_back(start.values());
  GaussianSource rng(cfg.seed);
  const std::size_t n = cfg.step_count();
  detail::PathRecorder rec(path, n, cfg.keep_path);
  rec.log_rejections = cfg.log_rejections;
  const auto result = detail::integrate_phi(start.span(), multiplicities(params), cfg, cfg.boundary_tol, rng, rec);
  if (result.status == detail::Advance::Exhausted) {
    throw NonConvergence("step at t=" + std::to_string(result.time) + " still rejected after " +
                         std::to_string(cfg.max_halvings) + " halvings");
  }
  return path;
}

struct LambdaStep {
  std::vector<double> lambda;
  bool clamped = false;
  bool reordered = false;
  bool collision = false;
  std::vector<std::string> clamped_coords;
};

inline constexpr double kCollisionGap = 1e-15;

/// Eigenvalue-SDE drift beta [p - (p+q) l_i + sum_{j != i} (l_i(1-l_j) + l_j(1-l_i)) / (l_i - l_j)].
inline std::vector<double> lambda_drift(std::span<const double> lambda, const ModelParams& params) {
  const std::size_t m = lambda.size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = params.p() - (params.p() + params.q()) * lambda[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double gap = lambda[i] - lambda[j];
      if (std::abs(gap) < kCollisionGap) throw SingularConfiguration("eigenvalue collision");
      acc += (lambda[i] * (1.0 - lambda[j]) + lambda[j] * (1.0 - lambda[i])) / gap;
    }
    out[i] = params.beta() * acc;
  }
  return out;
}

/// One Euler-Maruyama step of the eigenvalue SDE with clamp-to-[0,1] and
/// re-sort. `noise` holds Brownian increments (already scaled by sqrt(dt)).
inline LambdaStep step_lambda(std::span<const double> lambda, const ModelParams& params, double dt,
                              std::span<const double> noise) {
  const std::size_t m = lambda.size();
  LambdaStep out;
  out.lambda.assign(lambda.begin(), lambda.end());
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (lambda[i] - lambda[i + 1] < kCollisionGap) {
      out.collision = true;
      return out;
    }
  }
  const std::vector<double> drift = lambda_drift(lambda, params);
  for (std::size_t i = 0; i < m; ++i) {
    const double l = lambda[i];
    const double vol = 2.0 * std::sqrt(std::max(0.0, l * (1.0 - l)));
    double next = l + drift[i] * dt + vol * noise[i];
    if (next < 0.0 || next > 1.0) {
      next = std::clamp(next, 0.0, 1.0);
      out.clamped = true;
      out.clamped_coords.push_back("x_" + std::to_string(i + 1));
    }
    out.lambda[i] = next;
  }
  if (!std::is_sorted(out.lambda.begin(), out.lambda.end(), std::greater<>())) {
    std::sort(out.lambda.begin(), out.lambda.end(), std::greater<>());
    out.reordered = true;
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (out.lambda[i] - out.lambda[i + 1] < kCollisionGap) out.collision = true;
  }
  return out;
}

/// Simulates the eigenvalue SDE directly. A collision (gap < 1e-15) ends the
/// path with a hit record.
inline PathSample simulate_lambda(const LambdaPoint& start, const ModelParams& params, const SimConfig& cfg) {
  cfg.validate();
  detail::check_dimension(start.m(), params.m(), "simulate_lambda");
  PathSample path;
  path.coords = Coordinates::Lambda;
  path.times.push_back(0.0);
  path.states.push_back(start.values());
  GaussianSource rng(cfg.seed);
  const std::size_t m = start.values().size();
  std::vector<double> state = start.values();
  std::vector<double> noise(m);
  const std::size_t n = cfg.step_count();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (state[i] - state[i + 1] < kCollisionGap) {
      path.events.push_back(PathEvent{0.0, EventKind::Collision, {}});
      path.hit = HitRecord{0.0, "collision"};
      return path;
    }
  }
  for (std::size_t step = 1; step <= n; ++step) {
    const double t0 = cfg.time_at(step - 1);
    const double t1 = cfg.time_at(step);
    rng.fill(noise, std::sqrt(t1 - t0));
    LambdaStep s = step_lambda(state, params, t1 - t0, noise);
    state = std::move(s.lambda);
    if (s.clamped) path.events.push_back(PathEvent{t1, EventKind::Clamp, std::move(s.clamped_coords)});
    if (s.reordered) path.events.push_back(PathEvent{t1, EventKind::Reorder, {}});
    const bool last = step == n || s.collision;
    if (cfg.keep_path || last) {
      path.times.push_back(t1);
      path.states.push_back(state);
    }
    if (s.collision) {
      path.events.push_back(PathEvent{t1, EventKind::Collision, {}});
      path.hit = HitRecord{t1, "collision"};
      break;
    }
  }
  return path;
}

/// Multiplicities of the rank-one angular process psi = arcsin(sqrt(J)) for
/// dJ = 2 sqrt(J(1-J)) dB + (d - (d + d') J) dt.
inline Multiplicities rank_one_multiplicities(double d, double dprime) {
  return Multiplicities{(d - dprime) / 2.0, dprime - 1.0, 0.0};
}

namespace detail {

struct RankOneObserver : PathRecorder {
  double tol;
  std::optional<HitRecord> hit;

  RankOneObserver(PathSample& p, std::size_t n, bool keep, double boundary_tol)
      : PathRecorder(p, n, keep), tol(boundary_tol) {}

  bool on_accept(double t, std::span<const double> psi) {
    if (psi[0] <= tol) {
      hit = HitRecord{t, "zero"};
      return false;
    }
    if (kHalfPi - psi[0] <= tol) {
      hit = HitRecord{t, "one"};
      return false;
    }
    return true;
  }
  void on_reject(double, Reject, std::span<const double>) { ++path.rejections; }
  void on_step(std::size_t k, double t, std::span<const double> psi) {
    if (keep_path || k == n_steps) {
      const double s = std::sin(psi[0]);
      path.times.push_back(t);
      path.states.push_back({s * s});
    }
  }
};

}  // namespace detail

/// Scalar Jacobi path, integrated in the angle psi and recorded as J = sin^2 psi.
/// A hit of 0 (or 1) is declared when psi comes within boundary_tol of 0 (or
/// pi/2), or when a step crossing that boundary exhausts its halvings; the
/// path then ends with J set to the boundary value.
inline PathSample simulate_rank_one(double start, double d, double dprime, const SimConfig& cfg) {
  cfg.validate();
  if (!(start >= 0.0 && start <= 1.0)) throw ParameterError("start must lie in [0, 1]");
  if (!(d >= 0.0 && dprime >= 0.0)) throw ParameterError("d and d' must be non-negative");
  PathSample path;
  path.coords = Coordinates::RankOne;
  path.times.push_back(0.0);
  path.states.push_back({start});
  GaussianSource rng(cfg.seed);
  const std::size_t n = cfg.step_count();
  detail::RankOneObserver obs(path, n, cfg.keep_path, cfg.boundary_tol);
  const double psi0 = std::asin(std::sqrt(start));
  const std::vector<double> s0{psi0};
  const auto result = detail::integrate_phi(s0, rank_one_multiplicities(d, dprime), cfg, 0.0, rng, obs);
  if (result.status == detail::Advance::Exhausted) {
    const double psi = result.last_proposal.empty() ? psi0 : result.last_proposal[0];
    obs.hit = HitRecord{result.time, psi < kHalfPi / 2.0 ? "zero" : "one"};
  }
  if (obs.hit) {
    path.hit = obs.hit;
    path.times.push_back(obs.hit->time);
    path.states.push_back({obs.hit->kind == "zero" ? 0.0 : 1.0});
  }
  return path;
}

/// Paths i = 0..n-1 with seeds stream_seed(cfg.seed, i); output order is the
/// path index regardless of threading.
inline std::vector<PathSample> simulate_ensemble(const AlcovePoint& start, const ModelParams& params,
                                                 const SimConfig& cfg, std::size_t n_paths, unsigned threads = 1) {
  if (n_paths < 1) throw ParameterError("n_paths must be at least 1");
  cfg.validate();
  std::vector<PathSample> out(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    SimConfig c = cfg;
    c.seed = stream_seed(cfg.seed, i);
    try {
      out[i] = simulate_phi(start, params, c);
    } catch (const std::exception& e) {
      throw EnsembleError(i, e.what(), std::current_exception());
    }
  });
  return out;
}

/// Dispatches on cfg.scheme; the angular scheme starts from lambda_to_phi(start).
inline std::vector<PathSample> simulate_ensemble(const LambdaPoint& start, const ModelParams& params,
                                                 const SimConfig& cfg, std::size_t n_paths, unsigned threads = 1) {
  if (cfg.scheme == Scheme::PhiEuler) return simulate_ensemble(lambda_to_phi(start), params, cfg, n_paths, threads);
  if (n_paths < 1) throw ParameterError("n_paths must be at least 1");
  cfg.validate();
  std::vector<PathSample> out(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    SimConfig c = cfg;
    c.seed = stream_seed(cfg.seed, i);
    try {
      out[i] = simulate_lambda(start, params, c);
    } catch (const std::exception& e) {
      throw EnsembleError(i, e.what(), std::current_exception());
    }
  });
  return out;
}

}  // namespace bjl
