#pragma once

// Node sets on [0, 1].
//
// gauss_legendre is exact for polynomials of degree <= 2n - 1 and is used for
// smooth integrands. tanh_sinh clusters nodes doubly-exponentially at both
// ends and keeps the distance to each endpoint (x and 1 - x) separately, so
// integrable endpoint singularities like lambda^r (1 - lambda)^s with r, s > -1
// are resolved to near machine precision.

#include <cmath>
#include <cstddef>
#include <vector>

#include "bjl/errors.hpp"
#include "bjl/roots.hpp"

namespace bjl {

struct NodeSet {
  std::vector<double> x;   // nodes in [0, 1]
  std::vector<double> xc;  // 1 - x, computed without cancellation
  std::vector<double> w;   // weights; they sum to 1 up to rounding

  std::size_t size() const noexcept { return x.size(); }
};

/// n-point Gauss-Legendre rule mapped to [0, 1].
inline NodeSet gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre needs at least one node");
  NodeSet out;
  const auto un = static_cast<std::size_t>(n);
  out.x.resize(un);
  out.xc.resize(un);
  out.w.resize(un);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 1.0 / ((1.0 - z * z) * dp * dp);  // weight on [-1,1] divided by 2
    const std::size_t lo = static_cast<std::size_t>(i);
    const std::size_t hi = un - 1 - lo;
    // z > 0 here; node hi sits at (1 + z)/2.
    out.x[hi] = (1.0 + z) / 2.0;
    out.xc[hi] = (1.0 - z) / 2.0;
    out.x[lo] = out.xc[hi];
    out.xc[lo] = out.x[hi];
    out.w[lo] = out.w[hi] = w;
  }
  if (n % 2 == 1) {
    const std::size_t mid = un / 2;
    out.x[mid] = out.xc[mid] = 0.5;
  }
  return out;
}

/// Tanh-sinh rule on [0, 1] with n (odd) points over t in [-t_max, t_max]:
/// x(t) = 1 / (1 + exp(-pi sinh t)).
inline NodeSet tanh_sinh(int n, double t_max = 6.0) {
  if (n < 3) throw ParameterError("tanh_sinh needs at least three nodes");
  if (n % 2 == 0) ++n;
  const double h = 2.0 * t_max / (n - 1);
  NodeSet out;
  out.x.reserve(static_cast<std::size_t>(n));
  out.xc.reserve(static_cast<std::size_t>(n));
  out.w.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = -t_max + k * h;
    const double u = kPi * std::sinh(t);
    const double x = 1.0 / (1.0 + std::exp(-u));
    const double xc = 1.0 / (1.0 + std::exp(u));
    const double w = h * kPi * std::cosh(t) * x * xc;
    if (w == 0.0 || x == 0.0 || xc == 0.0) continue;
    out.x.push_back(x);
    out.xc.push_back(xc);
    out.w.push_back(w);
  }
  return out;
}

/// sum_k w_k f(x_k, 1 - x_k)
template <class F>
double integrate(const NodeSet& rule, F&& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.w[k] * f(rule.x[k], rule.xc[k]);
  return acc;
}

/// Integral of f over [a, b] using rule mapped affinely.
template <class F>
double integrate(const NodeSet& rule, double a, double b, F&& f) {
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) acc += rule.w[k] * f(a + len * rule.x[k]);
  return acc * len;
}

/// Tensor-product integral over [0,1]^m. f receives the node coordinates
/// and their complements 1 - x.
template <class F>
double integrate_cube(const NodeSet& rule, int m, F&& f) {
  if (m < 1) throw ParameterError("dimension must be at least 1");
  const std::size_t n = rule.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  std::vector<double> point(static_cast<std::size_t>(m));
  std::vector<double> comp(static_cast<std::size_t>(m));
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
      point[d] = rule.x[idx[d]];
      comp[d] = rule.xc[idx[d]];
      w *= rule.w[idx[d]];
    }
    acc += w * f(static_cast<const std::vector<double>&>(point), static_cast<const std::vector<double>&>(comp));
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == n) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return acc;
}

}  // namespace bjl
