#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is a byte offset into the source.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, const std::string& message)
      : Error(message + " at offset " + std::to_string(offset) + " (expected " + expected + ")"),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// A function evaluated outside its domain (sqrt/ln of a non-positive value,
/// real power of a negative base, division by zero).
class DomainError : public Error {
 public:
  DomainError(std::string function, double value, std::string node = {})
      : Error(function + " of " + std::to_string(value) + " is outside the domain" +
              (node.empty() ? std::string{} : " in '" + node + "'")),
        function_(std::move(function)),
        value_(value),
        node_(std::move(node)) {}

  const std::string& function() const { return function_; }
  double value() const { return value_; }
  const std::string& node() const { return node_; }

 private:
  std::string function_;
  double value_;
  std::string node_;
};

/// The fundamental tensor (or an induced metric) failed the eigenvalue floor.
class NonPositiveDefinite : public Error {
 public:
  explicit NonPositiveDefinite(double smallest_eigenvalue, const std::string& what = "fundamental tensor")
      : Error(what + " is not positive definite (smallest eigenvalue " +
              std::to_string(smallest_eigenvalue) + ")"),
        smallest_(smallest_eigenvalue) {}

  double smallest_eigenvalue() const { return smallest_; }

 private:
  double smallest_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(double estimate, double error_bound)
      : Error("volume quadrature did not converge: estimate " + std::to_string(estimate) +
              ", error bound " + std::to_string(error_bound)),
        estimate_(estimate),
        error_bound_(error_bound) {}

  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

class RandersConditionViolated : public Error {
  static std::string point_text(const std::vector<double>& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
    return s + ")";
  }

 public:
  RandersConditionViolated(std::vector<double> x, double norm)
      : Error("Randers condition |b|_a < 1 violated: |b|_a = " + std::to_string(norm) + " at x = " + point_text(x)),
        x_(std::move(x)),
        norm_(norm) {}

  const std::vector<double>& x() const { return x_; }
  double norm() const { return norm_; }

 private:
  std::vector<double> x_;
  double norm_;
};

/// Invalid user input: bad parameters, points outside the domain, bad config.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
