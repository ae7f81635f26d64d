#pragma once

// Central-difference estimates of mixed partials, used as an independent check
// on the jet engine. Each variable gets its own 1-D central stencil (second
// order accurate), the stencils are combined as a tensor product, and one
// Richardson level removes the h^2 term.

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

using ScalarFunction = std::function<double(std::span<const double>)>;

namespace detail {

inline std::vector<std::pair<int, double>> central_stencil(int k) {
  switch (k) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    case 4: return {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    default: throw InvalidInput("finite differences support derivative order <= 4 per variable");
  }
}

inline double tensor_stencil(const ScalarFunction& f, std::span<const double> point, std::span<const int> alpha,
                             double h) {
  const std::size_t n = point.size();
  std::vector<std::vector<std::pair<int, double>>> stencils(n);
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    stencils[i] = central_stencil(alpha[i]);
    total += alpha[i];
  }
  std::vector<std::size_t> pos(n, 0);
  std::vector<double> p(point.begin(), point.end());
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [offset, weight] = stencils[i][pos[i]];
      p[i] = point[i] + offset * h;
      w *= weight;
    }
    sum += w * f(p);
    std::size_t i = 0;
    while (i < n && ++pos[i] == stencils[i].size()) pos[i++] = 0;
    if (i == n) break;
  }
  double scale = 1.0;
  for (int k = 0; k < total; ++k) scale *= h;
  return sum / scale;
}

}  // namespace detail

/// Estimate of d^alpha f at `point`; |alpha| <= 4.
inline double finite_difference_oracle(const ScalarFunction& f, std::span<const double> point,
                                       std::span<const int> alpha, double step) {
  if (alpha.size() != point.size()) throw InvalidInput("multi-index length differs from the point dimension");
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw InvalidInput("negative multi-index entry");
    total += a;
  }
  if (total > 4) throw InvalidInput("finite differences support |alpha| <= 4");
  const double fine = detail::tensor_stencil(f, point, alpha, step);
  if (total == 0) return fine;
  const double coarse = detail::tensor_stencil(f, point, alpha, 2.0 * step);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace finsler
