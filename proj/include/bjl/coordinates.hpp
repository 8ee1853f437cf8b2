#pragma once

// Bijection between ordered eigenvalues in [0,1] and alcove angles, plus the
// complement symmetry phi -> reverse(pi/2 - phi).

#include <cmath>
#include <span>
#include <vector>

#include "bjl/errors.hpp"
#include "bjl/roots.hpp"

namespace bjl {

/// Eigenvalues in decreasing order, 0 <= lambda_m <= ... <= lambda_1 <= 1.
class LambdaPoint {
 public:
  explicit LambdaPoint(std::vector<double> lambda) : lambda_(std::move(lambda)) {
    if (lambda_.empty()) throw ParameterError("lambda point needs at least one coordinate");
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
      if (!std::isfinite(lambda_[i])) throw ParameterError("lambda point has a non-finite coordinate");
      if (i + 1 < lambda_.size() && lambda_[i] < lambda_[i + 1]) {
        throw ParameterError("lambda point must be ordered lambda_1 >= ... >= lambda_m");
      }
    }
    if (lambda_.back() < 0.0 || lambda_.front() > 1.0) {
      throw ParameterError("lambda point must lie in [0, 1]");
    }
  }

  int m() const noexcept { return static_cast<int>(lambda_.size()); }
  const std::vector<double>& values() const noexcept { return lambda_; }
  std::span<const double> span() const noexcept { return lambda_; }
  double operator[](std::size_t i) const { return lambda_[i]; }

  friend bool operator==(const LambdaPoint&, const LambdaPoint&) = default;

 private:
  std::vector<double> lambda_;
};

inline AlcovePoint lambda_to_phi(const LambdaPoint& x) {
  std::vector<double> phi(x.values().size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::asin(std::sqrt(x[i]));
  return AlcovePoint(std::move(phi));
}

inline LambdaPoint phi_to_lambda(const AlcovePoint& phi) {
  std::vector<double> lambda(phi.values().size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double s = std::sin(phi[i]);
    lambda[i] = std::min(1.0, s * s);
  }
  return LambdaPoint(std::move(lambda));
}

/// (pi/2 - phi_m, ..., pi/2 - phi_1)
inline AlcovePoint complement(const AlcovePoint& phi) {
  const std::size_t m = phi.values().size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = kHalfPi - phi[m - 1 - i];
  return AlcovePoint(std::move(out));
}

/// Evenly spaced interior point phi_i = (pi/2) (m - i + 1) / (m + 1), i = 1..m.
/// It is fixed by the complement map.
inline AlcovePoint alcove_reference_point(int m) {
  if (m < 1) throw ParameterError("m must be at least 1");
  std::vector<double> phi(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) phi[i] = kHalfPi * (m - i) / (m + 1);
  return AlcovePoint(std::move(phi));
}

/// Vandermonde product prod_{i<j} (lambda_i - lambda_j); positive for
/// strictly decreasing input.
inline double vandermonde(std::span<const double> lambda) {
  double v = 1.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    for (std::size_t j = i + 1; j < lambda.size(); ++j) v *= lambda[i] - lambda[j];
  }
  return v;
}

}  // namespace bjl
