#pragma once

// Closed-form densities.
//
// Transition densities use the decaying convention exp(-2 n (n + r + s + 1) t)
// for degree n. The beta = 2 density is evaluated in the factorization
//   p_t(theta, lambda) = exp(-c t) V(lambda) / V(theta) det[K_t(theta_i, lambda_j)]
//                        * prod_j W(lambda_j),
//   K_t(x, y) = sum_n exp(-2 n (n + r + s + 1) t) P_n(x) P_n(y),
// with the weights pulled out of the determinant. Multivariate polynomials
// are normalized as P_tau = det[P_{tau_i + m - i}(lambda_j)] / (V(lambda) prod_{n<m} kappa_n),
// so P_0 = 1, and the stationary density is
//   W_m(lambda) = (prod_{n<m} kappa_n)^2 prod_j W(lambda_j) V(lambda)^2,
// which integrates to one over the ordered simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bjl/coordinates.hpp"
#include "bjl/errors.hpp"
#include "bjl/orthopoly.hpp"
#include "bjl/quadrature.hpp"
#include "bjl/roots.hpp"

namespace bjl {

struct DensityEvaluation {
  double value = 0.0;
  int truncation_order = 0;
  double tail_bound = 0.0;
  bool ill_conditioned = false;
};

/// tau_1 >= ... >= tau_m >= 0
class Partition {
 public:
  explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw ParameterError("partition needs at least one part");
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] < 0) throw ParameterError("partition parts must be non-negative");
      if (i + 1 < parts_.size() && parts_[i] < parts_[i + 1]) throw ParameterError("partition parts must weakly decrease");
    }
  }

  const std::vector<int>& parts() const noexcept { return parts_; }
  int m() const noexcept { return static_cast<int>(parts_.size()); }
  int operator[](std::size_t i) const { return parts_[i]; }
  int largest() const noexcept { return parts_.front(); }

  /// Shifted degrees n_i = tau_i + m - i (1-based i), strictly decreasing.
  std::vector<int> shifted() const {
    std::vector<int> n(parts_.size());
    const int m = this->m();
    for (int i = 0; i < m; ++i) n[static_cast<std::size_t>(i)] = parts_[static_cast<std::size_t>(i)] + m - 1 - i;
    return n;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> parts_;
};

/// All partitions with m parts and tau_1 <= max_part, in lexicographic order.
inline std::vector<Partition> partitions(int m, int max_part) {
  if (m < 1) throw ParameterError("m must be at least 1");
  if (max_part < 0) throw ParameterError("max_part must be non-negative");
  std::vector<Partition> out;
  std::vector<int> cur(static_cast<std::size_t>(m), 0);
  auto rec = [&](auto&& self, int i, int bound) -> void {
    if (i == m) {
      out.emplace_back(cur);
      return;
    }
    for (int v = 0; v <= bound; ++v) {
      cur[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, v);
    }
  };
  rec(rec, 0, max_part);
  return out;
}

/// r_tau^beta = sum_i tau_i (tau_i + r + s + 1 + beta (m - i)).
template <class T>
T tau_eigenvalue(const Partition& tau, const T& r, const T& s, const T& beta) {
  T acc(0);
  const int m = tau.m();
  for (int i = 1; i <= m; ++i) {
    const T t(tau[static_cast<std::size_t>(i - 1)]);
    acc += t * (t + r + s + T(1) + beta * T(m - i));
  }
  return acc;
}

inline double tau_eigenvalue(const Partition& tau, double r, double s, double beta) {
  return tau_eigenvalue<double>(tau, r, s, beta);
}

/// c = -m(m-1) (2(m-2)/3 + (d + d')/2)
template <class T>
T km_constant_c(int m, const T& d, const T& dprime) {
  return -T(m) * T(m - 1) * (T(2) * T(m - 2) / T(3) + (d + dprime) / T(2));
}

/// c for beta = 2 with d = 2(r + 1), d' = 2(s + 1).
inline double km_constant_c(const ModelParams& params) {
  if (params.beta() != 2.0) throw UnsupportedRegime("the Karlin-McGregor constant is defined for beta = 2");
  const SpectralExponents e = spectral_exponents(params);
  return km_constant_c<double>(params.m(), 2.0 * (e.r + 1.0), 2.0 * (e.s + 1.0));
}

/// sum_i [r log lambda_i + s log(1 - lambda_i)] + beta sum_{i<j} log|lambda_i - lambda_j|;
/// -infinity on the boundary or at a collision.
inline double stationary_log_density_unnormalized(const LambdaPoint& lam, const ModelParams& params) {
  if (lam.m() != params.m()) throw ParameterError("lambda dimension does not match m");
  const SpectralExponents e = spectral_exponents(params);
  const auto& x = lam.values();
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || x[i] >= 1.0) return ninf;
    acc += e.r * std::log(x[i]) + e.s * std::log1p(-x[i]);
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double g = x[i] - x[j];
      if (g <= 0.0) return ninf;
      acc += params.beta() * std::log(g);
    }
  }
  return acc;
}

namespace detail {

// Log of the unnormalized stationary density from decreasing coordinates,
// their complements and the adjacent gaps, each computed without cancellation.
inline double stationary_log_density_ordered(const std::vector<double>& x, const std::vector<double>& xc,
                                             const std::vector<double>& gap, const SpectralExponents& e,
                                             double beta) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += e.r * std::log(x[i]) + e.s * std::log(xc[i]);
    double g = 0.0;
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      g += gap[j - 1];
      acc += beta * std::log(g);
    }
  }
  return acc;
}

// Integral over the ordered simplex 1 > l_1 > ... > l_m > 0 through
// l_k = u_1 ... u_k, with Jacobian prod_k u_k^(m-k). Collisions and the
// walls all land on faces of the unit cube, where tanh-sinh nodes cluster.
template <class F>
double integrate_ordered_simplex(const NodeSet& rule, int m, F&& f) {
  const auto um = static_cast<std::size_t>(m);
  std::vector<double> x(um), xc(um), gap(um > 1 ? um - 1 : 0);
  return integrate_cube(rule, m, [&](const std::vector<double>& u, const std::vector<double>& uc) {
    double jac = 1.0;
    for (std::size_t k = 0; k < um; ++k) {
      if (k == 0) {
        x[0] = u[0];
        xc[0] = uc[0];
      } else {
        x[k] = x[k - 1] * u[k];
        xc[k] = xc[k - 1] + x[k - 1] * uc[k];
        gap[k - 1] = x[k - 1] * uc[k];
      }
      jac *= std::pow(u[k], static_cast<double>(m - 1 - static_cast<int>(k)));
    }
    // product coordinates can underflow at the extreme nodes
    for (std::size_t k = 0; k < um; ++k)
      if (!(x[k] > 0.0 && xc[k] > 0.0) || (k > 0 && !(gap[k - 1] > 0.0))) return 0.0;
    return jac * f(x, xc, gap);
  });
}

inline double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

inline void check_stationary_quadrature(const ModelParams& params, int quad_nodes) {
  if (params.m() > 3) throw ParameterError("tensor quadrature is limited to m <= 3");
  if (quad_nodes < 3) throw ParameterError("quad_nodes must be at least 3");
}

}  // namespace detail

/// C such that C exp(stationary_log_density_unnormalized) integrates to one
/// over the ordered simplex (tensor tanh-sinh after the product map).
inline double stationary_normalizer(const ModelParams& params, int quad_nodes = 201) {
  detail::check_stationary_quadrature(params, quad_nodes);
  const SpectralExponents e = spectral_exponents(params);
  const NodeSet rule = tanh_sinh(quad_nodes);
  const double mass = detail::integrate_ordered_simplex(rule, params.m(), [&](const auto& x, const auto& xc, const auto& gap) {
    return std::exp(detail::stationary_log_density_ordered(x, xc, gap, e, params.beta()));
  });
  return 1.0 / mass;
}

struct StationaryMoments {
  double sum = 0.0;     // E[sum_i lambda_i]
  double sum_sq = 0.0;  // E[sum_i lambda_i^2]
};

inline StationaryMoments stationary_moments(const ModelParams& params, int quad_nodes = 201) {
  detail::check_stationary_quadrature(params, quad_nodes);
  const SpectralExponents e = spectral_exponents(params);
  const NodeSet rule = tanh_sinh(quad_nodes);
  const auto moment = [&](int power) {
    return detail::integrate_ordered_simplex(rule, params.m(), [&](const auto& x, const auto& xc, const auto& gap) {
      double f = power == 0 ? 1.0 : 0.0;
      if (power > 0)
        for (double v : x) f += std::pow(v, power);
      return f * std::exp(detail::stationary_log_density_ordered(x, xc, gap, e, params.beta()));
    });
  };
  const double mass = moment(0);
  const double s1 = moment(1);
  const double s2 = moment(2);
  return StationaryMoments{s1 / mass, s2 / mass};
}

/// Normalized beta = 2 stationary density (prod kappa_n)^2 prod W(lambda_j) V(lambda)^2.
inline double stationary_density_beta2(const LambdaPoint& lam, const JacobiBasis& basis) {
  const int m = lam.m();
  if (basis.max_degree() < m - 1) throw ParameterError("basis degree too small for m");
  double log_k = 0.0;
  for (int n = 0; n < m; ++n) log_k += basis.log_leading_coefficient(n);
  double w = std::exp(2.0 * log_k);
  for (double x : lam.values()) w *= basis.weight(x);
  const double v = vandermonde(lam.span());
  return w * v * v;
}

/// ceil(sqrt(20 / t)) + 10
inline int default_truncation(double t) {
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  return static_cast<int>(std::ceil(std::sqrt(20.0 / t))) + 10;
}

namespace detail {

inline double decay(int n, double r, double s, double t) { return std::exp(-2.0 * n * (n + r + s + 1.0) * t); }

/// sum_{n > N} exp(-2 n (n + r + s + 1) t) B_n^2 with B_n the endpoint bound.
inline double kernel_tail(const JacobiBasis& basis, int N, double t) {
  double tail = 0.0;
  for (int n = N + 1; n <= N + 400; ++n) {
    const double b = basis.endpoint_bound(n);
    const double term = decay(n, basis.r(), basis.s(), t) * b * b;
    tail += term;
    if (term < 1e-300 || (tail > 0.0 && term < 1e-17 * tail)) break;
  }
  return tail;
}

inline void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParameterError(std::string(what) + " must lie in [0, 1]");
}

inline double determinant(const Eigen::MatrixXd& a) {
  if (a.rows() == 1) return a(0, 0);
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

inline double min_gap(std::span<const double> x) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) g = std::min(g, x[i] - x[i + 1]);
  return g;
}

}  // namespace detail

/// sum_{n<=N} exp(-2 n (n + r + s + 1) t) P_n(theta) P_n(lambda) W(lambda).
/// N < 0 selects default_truncation(t). Throws TruncationError when the tail
/// estimate exceeds tol.
inline DensityEvaluation univariate_density(double theta, double lam, double t, const JacobiBasis& basis, int N = -1,
                                            double tol = std::numeric_limits<double>::infinity()) {
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  detail::check_unit(theta, "theta");
  detail::check_unit(lam, "lambda");
  if (N < 0) N = default_truncation(t);
  if (N > basis.max_degree()) {
    throw ParameterError("truncation " + std::to_string(N) + " exceeds basis degree " + std::to_string(basis.max_degree()));
  }
  std::vector<double> pt(static_cast<std::size_t>(N) + 1);
  std::vector<double> pl(static_cast<std::size_t>(N) + 1);
  basis.evaluate_all(N, theta, pt);
  basis.evaluate_all(N, lam, pl);
  double acc = 0.0;
  for (int n = N; n >= 0; --n) {
    const auto un = static_cast<std::size_t>(n);
    acc += detail::decay(n, basis.r(), basis.s(), t) * pt[un] * pl[un];
  }
  const double w = basis.weight(lam);
  DensityEvaluation out;
  out.value = acc * w;
  out.truncation_order = N;
  out.tail_bound = detail::kernel_tail(basis, N, t) * w;
  if (out.tail_bound > tol) throw TruncationError("univariate series tail " + std::to_string(out.tail_bound) + " exceeds tolerance");
  return out;
}

/// Karlin-McGregor form, see the header comment. m = 1 reduces to
/// univariate_density. Flags ill_conditioned when a gap is below 1e-6 or the
/// determinant has cancelled below 1e-10 of the Hadamard bound.
inline DensityEvaluation km_density_beta2(const LambdaPoint& theta, const LambdaPoint& lam, double t,
                                          const JacobiBasis& basis, int N = -1) {
  if (theta.m() != lam.m()) throw ParameterError("theta and lambda dimensions differ");
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  const int m = theta.m();
  if (N < 0) N = default_truncation(t);
  if (N > basis.max_degree()) throw ParameterError("truncation exceeds basis degree");
  if (N < m - 1) throw ParameterError("truncation must be at least m - 1");
  const double vt = vandermonde(theta.span());
  if (!(vt > 0.0)) throw SingularConfiguration("theta has coinciding coordinates");
  const auto um = static_cast<std::size_t>(m);
  const auto un = static_cast<std::size_t>(N) + 1;
  std::vector<double> pt(um * un);
  std::vector<double> pl(um * un);
  for (std::size_t i = 0; i < um; ++i) {
    basis.evaluate_all(N, theta[i], std::span<double>(pt).subspan(i * un, un));
    basis.evaluate_all(N, lam[i], std::span<double>(pl).subspan(i * un, un));
  }
  std::vector<double> decay(un);
  for (std::size_t n = 0; n < un; ++n) decay[n] = detail::decay(static_cast<int>(n), basis.r(), basis.s(), t);
  Eigen::MatrixXd k(m, m);
  double kmax = 0.0;
  for (std::size_t i = 0; i < um; ++i) {
    for (std::size_t j = 0; j < um; ++j) {
      double acc = 0.0;
      for (std::size_t n = un; n-- > 0;) acc += decay[n] * pt[i * un + n] * pl[j * un + n];
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
      kmax = std::max(kmax, std::abs(acc));
    }
  }
  const double c = km_constant_c<double>(m, 2.0 * (basis.r() + 1.0), 2.0 * (basis.s() + 1.0));
  double w = 1.0;
  for (double x : lam.values()) w *= basis.weight(x);
  const double prefactor = std::exp(-c * t) * vandermonde(lam.span()) / vt * w;
  DensityEvaluation out;
  out.value = prefactor * detail::determinant(k);
  out.truncation_order = N;
  const double eps = detail::kernel_tail(basis, N, t);
  out.tail_bound = std::abs(prefactor) * detail::factorial(m) * eps * std::pow(kmax + eps, m - 1);
  // Hadamard ratio: at long times K is close to rank one and the determinant
  // is lost to cancellation.
  double rows = 1.0;
  for (Eigen::Index i = 0; i < k.rows(); ++i) rows *= k.row(i).norm();
  const bool cancelled = rows > 0.0 && std::abs(detail::determinant(k)) < 1e-10 * rows;
  out.ill_conditioned =
      cancelled || detail::min_gap(theta.span()) < 1e-6 || detail::min_gap(lam.span()) < 1e-6;
  return out;
}

/// P_tau(lambda) = det[P_{tau_i + m - i}(lambda_j)] / (V(lambda) prod_{n<m} kappa_n).
inline double partition_polynomial(const Partition& tau, const LambdaPoint& lam, const JacobiBasis& basis) {
  if (tau.m() != lam.m()) throw ParameterError("partition and lambda dimensions differ");
  const int m = tau.m();
  const std::vector<int> n = tau.shifted();
  if (n.front() > basis.max_degree()) throw ParameterError("partition exceeds basis degree");
  const double v = vandermonde(lam.span());
  if (!(v > 0.0)) throw SingularConfiguration("lambda has coinciding coordinates");
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a(i, j) = basis(n[static_cast<std::size_t>(i)], lam[static_cast<std::size_t>(j)]);
  }
  double log_k = 0.0;
  for (int d = 0; d < m; ++d) log_k += basis.log_leading_coefficient(d);
  return detail::determinant(a) / (v * std::exp(log_k));
}

/// sum_{tau_1 <= K} exp(-2 r_tau^2 t) P_tau(theta) P_tau(lambda) W_m(lambda),
/// K < 0 selects default_truncation(t) - m. Throws TruncationError when the
/// tail estimate exceeds tol.
inline DensityEvaluation partition_sum_density_beta2(const LambdaPoint& theta, const LambdaPoint& lam, double t,
                                                     const JacobiBasis& basis, int K = -1,
                                                     double tol = std::numeric_limits<double>::infinity()) {
  if (theta.m() != lam.m()) throw ParameterError("theta and lambda dimensions differ");
  if (!(t > 0.0)) throw ParameterError("t must be positive");
  const int m = theta.m();
  if (K < 0) K = std::max(0, default_truncation(t) - m);
  const int top = K + m - 1;
  if (top > basis.max_degree()) throw ParameterError("partition cutoff exceeds basis degree");
  const double vt = vandermonde(theta.span());
  if (!(vt > 0.0)) throw SingularConfiguration("theta has coinciding coordinates");
  const auto um = static_cast<std::size_t>(m);
  const auto un = static_cast<std::size_t>(top) + 1;
  std::vector<double> pt(um * un);
  std::vector<double> pl(um * un);
  for (std::size_t i = 0; i < um; ++i) {
    basis.evaluate_all(top, theta[i], std::span<double>(pt).subspan(i * un, un));
    basis.evaluate_all(top, lam[i], std::span<double>(pl).subspan(i * un, un));
  }
  Eigen::MatrixXd at(m, m);
  Eigen::MatrixXd al(m, m);
  double acc = 0.0;
  for (const Partition& tau : partitions(m, K)) {
    const std::vector<int> n = tau.shifted();
    for (std::size_t i = 0; i < um; ++i) {
      const auto ni = static_cast<std::size_t>(n[i]);
      for (std::size_t j = 0; j < um; ++j) {
        at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pt[j * un + ni];
        al(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pl[j * un + ni];
      }
    }
    const double e = std::exp(-2.0 * tau_eigenvalue(tau, basis.r(), basis.s(), 2.0) * t);
    acc += e * detail::determinant(at) * detail::determinant(al);
  }
  double w = 1.0;
  for (double x : lam.values()) w *= basis.weight(x);
  const double prefactor = vandermonde(lam.span()) / vt * w;
  DensityEvaluation out;
  out.value = prefactor * acc;
  out.truncation_order = K;
  // Hadamard-type bound on the first shells beyond the cutoff.
  double tail = 0.0;
  const double mf = detail::factorial(m);
  for (int shell = K + 1; shell <= K + 40; ++shell) {
    double shell_sum = 0.0;
    for (const Partition& tau : partitions(m, shell)) {
      if (tau.largest() != shell) continue;
      double b = mf;
      for (int d : tau.shifted()) b *= basis.endpoint_bound(d);
      shell_sum += std::exp(-2.0 * tau_eigenvalue(tau, basis.r(), basis.s(), 2.0) * t) * b * b;
    }
    tail += shell_sum;
    if (shell_sum < 1e-17 * std::max(tail, 1e-300)) break;
  }
  out.tail_bound = std::abs(prefactor) * tail;
  out.ill_conditioned = detail::min_gap(theta.span()) < 1e-6 || detail::min_gap(lam.span()) < 1e-6;
  if (out.tail_bound > tol) throw TruncationError("partition sum tail " + std::to_string(out.tail_bound) + " exceeds tolerance");
  return out;
}

}  // namespace bjl
