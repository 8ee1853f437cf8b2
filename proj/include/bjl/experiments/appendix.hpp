#pragma once

// The function h = prod_{alpha in R_+} sin<alpha, phi>, its Laplacian ratio
// and the Vandermonde identity used to bound it.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/errors.hpp"
#include "bjl/roots.hpp"

namespace bjl {

/// prod_i sin(phi_i) sin(2 phi_i) prod_{i<j} sin(phi_i - phi_j) sin(phi_i + phi_j)
inline double h_product(std::span<const double> phi) {
  double h = 1.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    h *= std::sin(phi[i]) * std::sin(2.0 * phi[i]);
    for (std::size_t j = i + 1; j < phi.size(); ++j) h *= std::sin(phi[i] - phi[j]) * std::sin(phi[i] + phi[j]);
  }
  return h;
}

inline double h_function(const AlcovePoint& phi) { return h_product(phi.span()); }

/// 2^m prod_i lambda_i sqrt(1 - lambda_i) V(lambda)
inline double h_function_lambda(const LambdaPoint& lam) {
  double h = std::ldexp(1.0, lam.m());
  for (double x : lam.values()) h *= x * std::sqrt(1.0 - x);
  return h * vandermonde(lam.span());
}

/// -8m(m-1) - 9m - 4m(m-1)(m-2)/3 + sum_i 2/lambda_i with lambda_i = sin^2 phi_i.
inline double laplacian_ratio_closed_form(const AlcovePoint& phi) {
  const int m = phi.m();
  const LambdaPoint lam = phi_to_lambda(phi);
  for (std::size_t i = 0; i < lam.values().size(); ++i) {
    if (lam[i] <= 0.0) throw SingularConfiguration("lambda_i = 0 makes the ratio infinite");
    if (i + 1 < lam.values().size() && lam[i] == lam[i + 1]) throw SingularConfiguration("coinciding eigenvalues");
  }
  double acc = -8.0 * m * (m - 1) - 9.0 * m - 4.0 * m * (m - 1) * (m - 2) / 3.0;
  for (double x : lam.values()) acc += 2.0 / x;
  return acc;
}

/// c(m) = -8m^2 - m - 4m(m-1)(m-2)/3
inline double laplacian_bound(int m) { return -8.0 * m * m - m - 4.0 * m * (m - 1) * (m - 2) / 3.0; }

/// sum_i [h(phi + s e_i) - 2 h(phi) + h(phi - s e_i)] / s^2, divided by h(phi).
inline double laplacian_ratio_finite_difference(const AlcovePoint& phi, double step) {
  if (!(step > 0.0)) throw ParameterError("step must be positive");
  if (!(detail::wall_margin(phi.span()) > 2.0 * step)) throw ParameterError("point is within 2 step of a wall");
  std::vector<double> x = phi.values();
  const double h0 = h_product(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double hp = h_product(x);
    x[i] = xi - step;
    const double hm = h_product(x);
    x[i] = xi;
    acc += (hp - 2.0 * h0 + hm) / (step * step);
  }
  return acc / h0;
}

/// (4 D(step/2) - D(step)) / 3
inline double laplacian_ratio_richardson(const AlcovePoint& phi, double step) {
  return (4.0 * laplacian_ratio_finite_difference(phi, step / 2.0) - laplacian_ratio_finite_difference(phi, step)) / 3.0;
}

struct VandermondeCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = 2 sum_i lambda_i (1 - lambda_i) d_i^2 V, rhs = -(2m(m-1)(m-2)/3) V, with
/// d_i^2 V / V = (sum_{j!=i} 1/(l_i - l_j))^2 - sum_{j!=i} 1/(l_i - l_j)^2.
inline VandermondeCheck vandermonde_identity_check(const LambdaPoint& lam) {
  const auto& x = lam.values();
  const std::size_t m = x.size();
  const double v = vandermonde(x);
  if (v == 0.0) throw SingularConfiguration("coinciding eigenvalues");
  double lhs = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double u = 1.0 / (x[i] - x[j]);
      s1 += u;
      s2 += u * u;
    }
    lhs += 2.0 * x[i] * (1.0 - x[i]) * (s1 * s1 - s2);
  }
  const double mm = static_cast<double>(m);
  return VandermondeCheck{lhs * v, -(2.0 * mm * (mm - 1.0) * (mm - 2.0) / 3.0) * v};
}

}  // namespace bjl
