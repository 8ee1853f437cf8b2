#pragma once

// Orthonormal Jacobi polynomials on [0, 1] for the probability weight
//   W(lambda) = lambda^r (1 - lambda)^s / B(r + 1, s + 1).
// Degree n is the classical P_n^{(a,b)}(2 lambda - 1) with (a, b) = (s, r),
// rescaled to unit norm with a positive leading coefficient. Evaluation runs
// the symmetric (Jacobi-matrix) three-term recurrence of the orthonormal
// family directly, which stays O(1) in magnitude on [0, 1].

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "bjl/errors.hpp"

namespace bjl {

namespace detail {

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace detail

class JacobiBasis {
 public:
  JacobiBasis(double r, double s, int max_degree) : r_(r), s_(s), max_degree_(max_degree) {
    if (!(std::isfinite(r) && r > -1.0)) throw ParameterError("Jacobi exponent r must exceed -1");
    if (!(std::isfinite(s) && s > -1.0)) throw ParameterError("Jacobi exponent s must exceed -1");
    if (max_degree < 0) throw ParameterError("max_degree must be non-negative");
    const double a = s;
    const double b = r;
    const auto n_max = static_cast<std::size_t>(max_degree);
    diag_.resize(n_max + 1);
    off_.resize(n_max + 2);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double k = static_cast<double>(n);
      double alpha;
      if (n == 0) {
        alpha = (b - a) / (a + b + 2.0);
      } else {
        alpha = (b * b - a * a) / ((2.0 * k + a + b) * (2.0 * k + a + b + 2.0));
      }
      diag_[n] = (alpha + 1.0) / 2.0;
    }
    off_[0] = 0.0;
    for (std::size_t n = 1; n <= n_max + 1; ++n) {
      const double k = static_cast<double>(n);
      const double c = 2.0 * k + a + b;
      double beta;
      if (n == 1) {
        beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b));
      } else {
        beta = 4.0 * k * (k + a) * (k + b) * (k + a + b) / (c * c * (c + 1.0) * (c - 1.0));
      }
      off_[n] = std::sqrt(beta) / 2.0;
    }
    log_lead_.resize(n_max + 1);
    log_lead_[0] = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) log_lead_[n] = log_lead_[n - 1] - std::log(off_[n]);
    log_norm_const_ = -detail::log_beta(r + 1.0, s + 1.0);
  }

  double r() const noexcept { return r_; }
  double s() const noexcept { return s_; }
  int max_degree() const noexcept { return max_degree_; }

  /// P_n(lambda) via the forward recurrence.
  double operator()(int n, double lambda) const {
    check_degree(n);
    double prev = 0.0;
    double cur = 1.0;
    for (int k = 0; k < n; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const double next = ((lambda - diag_[uk]) * cur - off_[uk] * prev) / off_[uk + 1];
      prev = cur;
      cur = next;
    }
    return cur;
  }

  /// P_0..P_N at lambda in one recurrence pass.
  std::vector<double> evaluate_all(int N, double lambda) const {
    std::vector<double> out(static_cast<std::size_t>(std::max(N, 0)) + 1);
    evaluate_all(N, lambda, out);
    return out;
  }

  void evaluate_all(int N, double lambda, std::span<double> out) const {
    check_degree(N);
    out[0] = 1.0;
    if (N == 0) return;
    out[1] = (lambda - diag_[0]) / off_[1];
    for (std::size_t k = 1; k < static_cast<std::size_t>(N); ++k) {
      out[k + 1] = ((lambda - diag_[k]) * out[k] - off_[k] * out[k - 1]) / off_[k + 1];
    }
  }

  /// W(lambda); the two-argument form takes 1 - lambda separately for
  /// accuracy near lambda = 1.
  double weight(double lambda) const { return weight(lambda, 1.0 - lambda); }

  double weight(double lambda, double one_minus) const {
    if (lambda < 0.0 || one_minus < 0.0) return 0.0;
    double lw = log_norm_const_;
    if (r_ != 0.0) lw += r_ * std::log(lambda);
    if (s_ != 0.0) lw += s_ * std::log(one_minus);
    return std::exp(lw);
  }

  /// Leading coefficient of P_n as a polynomial in lambda (positive).
  double leading_coefficient(int n) const {
    check_degree(n);
    return std::exp(log_lead_[static_cast<std::size_t>(n)]);
  }

  double log_leading_coefficient(int n) const {
    check_degree(n);
    return log_lead_[static_cast<std::size_t>(n)];
  }

  /// Classical squared norm of P_n^{(s,r)}(2 lambda - 1) under W, from log-Gamma.
  double classical_norm_squared(int n) const { return std::exp(log_classical_norm_squared(n)); }

  double log_classical_norm_squared(int n) const {
    if (n < 0) throw ParameterError("degree must be non-negative");
    if (n == 0) return 0.0;
    const double a = s_;
    const double b = r_;
    const double k = n;
    return std::lgamma(k + a + 1.0) + std::lgamma(k + b + 1.0) + std::lgamma(a + b + 2.0) -
           std::log(2.0 * k + a + b + 1.0) - std::lgamma(k + a + b + 1.0) - std::lgamma(k + 1.0) -
           std::lgamma(a + 1.0) - std::lgamma(b + 1.0);
  }

  /// |P_n| at lambda = 1 and lambda = 0 from the classical endpoint values
  /// binom(n + s, n) and binom(n + r, n). When max(r, s) >= -1/2 the larger of
  /// the two bounds |P_n| on [0, 1].
  double endpoint_bound(int n) const {
    if (n == 0) return 1.0;
    const double k = n;
    const double log_at_one = std::lgamma(k + s_ + 1.0) - std::lgamma(k + 1.0) - std::lgamma(s_ + 1.0);
    const double log_at_zero = std::lgamma(k + r_ + 1.0) - std::lgamma(k + 1.0) - std::lgamma(r_ + 1.0);
    return std::exp(std::max(log_at_one, log_at_zero) - 0.5 * log_classical_norm_squared(n));
  }

 private:
  void check_degree(int n) const {
    if (n < 0 || n > max_degree_) {
      throw ParameterError("degree " + std::to_string(n) + " outside [0, " + std::to_string(max_degree_) + "]");
    }
  }

  double r_;
  double s_;
  int max_degree_;
  std::vector<double> diag_;  // recurrence diagonal in lambda
  std::vector<double> off_;   // recurrence off-diagonal in lambda, off_[n] couples n-1 and n
  std::vector<double> log_lead_;
  double log_norm_const_;
};

inline JacobiBasis build_basis(double r, double s, int max_degree) { return JacobiBasis(r, s, max_degree); }

}  // namespace bjl
