#pragma once

// Averaging rules on the unit sphere S^{n-1}. Weights are normalized to sum
// to one, so a rule computes the mean of a function over the sphere.

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace finsler {

struct SphereRule {
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;

  double mean(const std::function<double(const Eigen::VectorXd&)>& f) const;
};

/// Lebedev-Laikov octahedral rules; `points` is 302 or 590.
const SphereRule& lebedev_rule(int points);

/// Equally spaced angles on the circle.
SphereRule circle_rule(int points);

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights);

/// Product rule in hyperspherical angles: Gauss-Legendre with `points` nodes
/// for each polar angle and 2*points equally spaced nodes for the azimuth.
SphereRule product_sphere_rule(int n, int points);

struct MeanEstimate {
  double value;
  double error_bound;  // |fine - coarse|
};

/// Mean over S^{n-1} with an error estimate from a coarse/fine pair:
/// n = 2 trapezoid 1024/2048; n = 3 Lebedev 302/590, escalating to product
/// rules 64/128; n >= 4 product rules N/2N escalating to 4N. Escalation stops
/// once the estimate is within `rel_target` relative.
MeanEstimate sphere_mean(int n, const std::function<double(const Eigen::VectorXd&)>& f, double rel_target = 1e-6);

}  // namespace finsler
