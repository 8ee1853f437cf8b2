#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace bjl {

/// Invalid model, configuration, or function argument.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A root pairing sits on a cotangent pole.
class SingularConfiguration : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Reject-and-halve ran out of halvings.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A truncated series left more than the requested tolerance behind.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested (m, beta) combination has no closed form here.
class UnsupportedRegime : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(std::size_t path_index, const std::string& what, std::exception_ptr cause = nullptr)
      : std::runtime_error("path " + std::to_string(path_index) + ": " + what),
        path_index_(path_index),
        cause_(std::move(cause)) {}

  std::size_t path_index() const noexcept { return path_index_; }
  /// The per-path exception, for callers that dispatch on its type.
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::size_t path_index_;
  std::exception_ptr cause_;
};

}  // namespace bjl
