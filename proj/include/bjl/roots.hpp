#pragma once

// Model parameters, the BC_m root system, the principal alcove and the
// trigonometric drift of the angular process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bjl/errors.hpp"

namespace bjl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// (beta, p, q, m). Parameters below the strong-solution range are allowed
/// (hitting experiments need them) and reported through strong_regime().
class ModelParams {
 public:
  ModelParams(double beta, double p, double q, int m) : beta_(beta), p_(p), q_(q), m_(m) {
    if (!(std::isfinite(beta) && beta > 0.0)) throw ParameterError("beta must be a positive real");
    if (!(std::isfinite(p) && p > 0.0)) throw ParameterError("p must be a positive real");
    if (!(std::isfinite(q) && q > 0.0)) throw ParameterError("q must be a positive real");
    if (m < 1) throw ParameterError("m must be at least 1");
  }

  /// Brownian motion in the BC alcove: every multiplicity equal to one.
  static ModelParams alcove_brownian_motion(int m) {
    return ModelParams(2.0, m + 1.5, m + 0.5, m);
  }

  double beta() const noexcept { return beta_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  int m() const noexcept { return m_; }

  /// min(p, q) > (m - 1) + 1/beta
  bool strong_regime() const noexcept {
    return std::min(p_, q_) > (m_ - 1) + 1.0 / beta_;
  }

  ModelParams swapped() const { return ModelParams(beta_, q_, p_, m_); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double beta_;
  double p_;
  double q_;
  int m_;
};

/// Orbit weights. k1 is the coefficient of cot(2 phi_i) in the drift, i.e.
/// twice the multiplicity of the long roots 2e_i.
struct Multiplicities {
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
};

inline Multiplicities multiplicities(const ModelParams& params) {
  const double b = params.beta();
  return Multiplicities{b * (params.p() - params.q()) / 2.0,
                        b * (params.q() - (params.m() - 1)) - 1.0, b / 2.0};
}

/// Exponents (r, s) of the stationary weight lambda^r (1 - lambda)^s.
struct SpectralExponents {
  double r = 0.0;
  double s = 0.0;
};

inline SpectralExponents spectral_exponents(const ModelParams& params) {
  const double b = params.beta();
  const int m = params.m();
  SpectralExponents e{b * (params.p() - (m - 1)) / 2.0 - 1.0, b * (params.q() - (m - 1)) / 2.0 - 1.0};
  if (!(e.r > -1.0) || !(e.s > -1.0)) {
    throw ParameterError("spectral exponents need p > m - 1 and q > m - 1");
  }
  return e;
}

enum class RootOrbit { Short, Long, Mixed };

/// A root of BC_m with exact integer coefficients in the canonical basis.
class Root {
 public:
  static Root e(int m, int i) {
    Root r(m, RootOrbit::Short);
    r.coeffs_.at(i) = 1;
    return r;
  }
  static Root two_e(int m, int i) {
    Root r(m, RootOrbit::Long);
    r.coeffs_.at(i) = 2;
    return r;
  }
  /// e_i - e_j (i != j)
  static Root e_minus(int m, int i, int j) {
    Root r(m, RootOrbit::Mixed);
    r.coeffs_.at(i) = 1;
    r.coeffs_.at(j) = -1;
    return r;
  }
  /// e_i + e_j (i != j)
  static Root e_plus(int m, int i, int j) {
    Root r(m, RootOrbit::Mixed);
    r.coeffs_.at(i) = 1;
    r.coeffs_.at(j) = 1;
    return r;
  }

  /// Builds a root from raw coefficients, classifying its orbit.
  static Root from_coeffs(std::vector<int> coeffs) {
    int nonzero = 0;
    int abs_sum = 0;
    int max_abs = 0;
    for (int c : coeffs) {
      if (c != 0) ++nonzero;
      abs_sum += std::abs(c);
      max_abs = std::max(max_abs, std::abs(c));
    }
    RootOrbit orbit;
    if (nonzero == 1 && max_abs == 1) {
      orbit = RootOrbit::Short;
    } else if (nonzero == 1 && max_abs == 2) {
      orbit = RootOrbit::Long;
    } else if (nonzero == 2 && abs_sum == 2) {
      orbit = RootOrbit::Mixed;
    } else {
      throw ParameterError("coefficients do not form a BC root");
    }
    Root r(static_cast<int>(coeffs.size()), orbit);
    r.coeffs_ = std::move(coeffs);
    return r;
  }

  const std::vector<int>& coeffs() const noexcept { return coeffs_; }
  RootOrbit orbit() const noexcept { return orbit_; }
  int rank() const noexcept { return static_cast<int>(coeffs_.size()); }

  double pairing(std::span<const double> v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) acc += coeffs_[i] * v[i];
    return acc;
  }

  int norm_squared() const noexcept {
    int acc = 0;
    for (int c : coeffs_) acc += c * c;
    return acc;
  }

  /// Orbit-constant multiplicity k(alpha).
  double multiplicity(const Multiplicities& k) const noexcept {
    switch (orbit_) {
      case RootOrbit::Short:
        return k.k0;
      case RootOrbit::Long:
        return k.k1 / 2.0;
      case RootOrbit::Mixed:
        return k.k2;
    }
    return 0.0;
  }

  /// Human-readable form such as "e1-e2" or "2e1" (1-based indices).
  std::string name() const {
    std::string out;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      const int c = coeffs_[i];
      if (c == 0) continue;
      if (c < 0) {
        out += "-";
      } else if (!out.empty()) {
        out += "+";
      }
      if (std::abs(c) != 1) out += std::to_string(std::abs(c));
      out += "e" + std::to_string(i + 1);
    }
    return out;
  }

  friend bool operator==(const Root&, const Root&) = default;

 private:
  Root(int m, RootOrbit orbit) : coeffs_(static_cast<std::size_t>(m), 0), orbit_(orbit) {}

  std::vector<int> coeffs_;
  RootOrbit orbit_;
};

/// R_+ = {e_i} u {2e_i} u {e_i - e_j, e_i + e_j : i < j}; m^2 + m roots.
inline std::vector<Root> positive_roots(int m) {
  if (m < 1) throw ParameterError("m must be at least 1");
  std::vector<Root> roots;
  roots.reserve(static_cast<std::size_t>(m * m + m));
  for (int i = 0; i < m; ++i) roots.push_back(Root::e(m, i));
  for (int i = 0; i < m; ++i) roots.push_back(Root::two_e(m, i));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      roots.push_back(Root::e_minus(m, i, j));
      roots.push_back(Root::e_plus(m, i, j));
    }
  }
  return roots;
}

struct SimpleSystem {
  std::vector<Root> simple;
  Root highest;
};

/// Simple roots e_i - e_{i+1}, e_m and the highest root 2e_1.
inline SimpleSystem simple_and_highest(int m) {
  if (m < 1) throw ParameterError("m must be at least 1");
  std::vector<Root> simple;
  for (int i = 0; i + 1 < m; ++i) simple.push_back(Root::e_minus(m, i, i + 1));
  simple.push_back(Root::e(m, m - 1));
  return SimpleSystem{std::move(simple), Root::two_e(m, 0)};
}

/// Orthogonal reflection through the hyperplane orthogonal to `root`.
inline std::vector<double> reflect(const Root& root, std::span<const double> v) {
  if (static_cast<int>(v.size()) != root.rank()) throw ParameterError("dimension mismatch in reflect");
  const double factor = 2.0 * root.pairing(v) / root.norm_squared();
  std::vector<double> out(v.begin(), v.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= factor * root.coeffs()[i];
  return out;
}

/// Ordered angles 0 <= phi_m <= ... <= phi_1 <= pi/2 (the closed alcove
/// scaled by pi). Index 0 holds phi_1.
class AlcovePoint {
 public:
  explicit AlcovePoint(std::vector<double> phi) : phi_(std::move(phi)) {
    if (phi_.empty()) throw ParameterError("alcove point needs at least one coordinate");
    for (std::size_t i = 0; i < phi_.size(); ++i) {
      if (!std::isfinite(phi_[i])) throw ParameterError("alcove point has a non-finite coordinate");
      if (i + 1 < phi_.size() && phi_[i] < phi_[i + 1]) {
        throw ParameterError("alcove point must be ordered phi_1 >= ... >= phi_m");
      }
    }
    if (phi_.back() < 0.0 || phi_.front() > kHalfPi) {
      throw ParameterError("alcove point must lie in [0, pi/2]");
    }
  }

  int m() const noexcept { return static_cast<int>(phi_.size()); }
  const std::vector<double>& values() const noexcept { return phi_; }
  std::span<const double> span() const noexcept { return phi_; }
  double operator[](std::size_t i) const { return phi_[i]; }

  friend bool operator==(const AlcovePoint&, const AlcovePoint&) = default;

 private:
  std::vector<double> phi_;
};

enum class PositionKind { Interior, OnWall, Outside };

struct Position {
  PositionKind kind = PositionKind::Interior;
  std::vector<Root> walls;  // walls within tol (OnWall) or violated (Outside)
};

namespace detail {

/// Signed distances to the alcove walls in the order
/// e_1-e_2, ..., e_{m-1}-e_m, e_m, highest root.
inline void wall_values(std::span<const double> phi, std::span<double> out) {
  const std::size_t m = phi.size();
  for (std::size_t i = 0; i + 1 < m; ++i) out[i] = phi[i] - phi[i + 1];
  out[m - 1] = phi[m - 1];
  out[m] = kPi - 2.0 * phi[0];
}

inline Root wall_root(int m, std::size_t index) {
  if (index + 1 < static_cast<std::size_t>(m)) return Root::e_minus(m, static_cast<int>(index), static_cast<int>(index) + 1);
  if (index + 1 == static_cast<std::size_t>(m)) return Root::e(m, m - 1);
  return Root::two_e(m, 0);
}

/// Smallest wall value; positive iff strictly inside.
inline double wall_margin(std::span<const double> phi) {
  const std::size_t m = phi.size();
  double best = std::min(phi[m - 1], kPi - 2.0 * phi[0]);
  for (std::size_t i = 0; i + 1 < m; ++i) best = std::min(best, phi[i] - phi[i + 1]);
  return best;
}

inline double cot(double x) { return 1.0 / std::tan(x); }

/// Explicit drift without validation; phi must be strictly interior.
inline void explicit_drift(std::span<const double> phi, const Multiplicities& k, std::span<double> out) {
  const std::size_t m = phi.size();
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = k.k0 * cot(phi[i]) + k.k1 * cot(2.0 * phi[i]);
  }
  if (k.k2 == 0.0) return;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double plus = cot(phi[i] + phi[j]);
      const double minus = cot(phi[i] - phi[j]);
      out[i] += k.k2 * (plus + minus);
      out[j] += k.k2 * (plus - minus);
    }
  }
}

inline void check_not_singular(std::span<const double> phi, double tol) {
  const int m = static_cast<int>(phi.size());
  for (const Root& root : positive_roots(m)) {
    const double x = root.pairing(phi);
    if (std::abs(std::remainder(x, kPi)) <= tol) {
      throw SingularConfiguration("root " + root.name() + " pairs to a multiple of pi");
    }
  }
}

}  // namespace detail

/// Interior iff every wall value exceeds tol; OnWall lists walls within tol;
/// Outside if any wall is violated by more than tol.
inline Position classify_position(std::span<const double> phi, double tol) {
  if (phi.empty()) throw ParameterError("empty point");
  if (tol < 0.0) throw ParameterError("tolerance must be non-negative");
  const int m = static_cast<int>(phi.size());
  std::vector<double> values(static_cast<std::size_t>(m) + 1);
  detail::wall_values(phi, values);
  Position out;
  std::vector<Root> near;
  for (std::size_t w = 0; w < values.size(); ++w) {
    if (values[w] < -tol) {
      out.walls.push_back(detail::wall_root(m, w));
    } else if (values[w] <= tol) {
      near.push_back(detail::wall_root(m, w));
    }
  }
  if (!out.walls.empty()) {
    out.kind = PositionKind::Outside;
  } else if (!near.empty()) {
    out.kind = PositionKind::OnWall;
    out.walls = std::move(near);
  }
  return out;
}

inline constexpr double kDefaultSingularTol = 1e-12;

/// sum_{alpha in R_+} k(alpha) cot(<alpha, phi>) alpha
inline std::vector<double> drift_root_sum(const AlcovePoint& phi, const Multiplicities& k,
                                          double singular_tol = kDefaultSingularTol) {
  detail::check_not_singular(phi.span(), singular_tol);
  const int m = phi.m();
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (const Root& root : positive_roots(m)) {
    const double weight = root.multiplicity(k) * detail::cot(root.pairing(phi.span()));
    for (int i = 0; i < m; ++i) out[i] += weight * root.coeffs()[i];
  }
  return out;
}

/// k0 cot(phi_i) + k1 cot(2 phi_i) + k2 sum_{j != i} [cot(phi_i + phi_j) + cot(phi_i - phi_j)]
inline std::vector<double> drift_explicit(const AlcovePoint& phi, const Multiplicities& k,
                                          double singular_tol = kDefaultSingularTol) {
  detail::check_not_singular(phi.span(), singular_tol);
  std::vector<double> out(phi.values().size());
  detail::explicit_drift(phi.span(), k, out);
  return out;
}

}  // namespace bjl
