#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "finsler/expr.hpp"

namespace finsler {

enum class VolumeKind { lebesgue, busemann_hausdorff, riemannian_auto, custom };

struct VolumeForm {
  VolumeKind kind{VolumeKind::lebesgue};
  Expr sigma;  // custom only; may reference x and parameters, never y
};

std::string to_string(VolumeKind kind);

/// A Finsler structure on a domain of R^n. Immutable once built.
struct MetricModel {
  std::string id;  // zoo id, or "expr" for user text
  int dim{0};
  Expr F;
  ParamMap params;
  VolumeForm volume;

  /// Row-major a_ij(x) and b_i(x) of the Riemannian and Randers families.
  std::vector<Expr> coefficient_a;
  std::vector<Expr> one_form_b;
  /// F = sqrt(a_ij y^i y^j); enables the riemannian_auto volume.
  bool riemannian{false};

  /// Base points are sampled in the ball of this radius.
  double base_radius{0.5};
  /// Sampled fibre directions keep min_i |theta_i| above this margin.
  double direction_margin{0.0};
  /// Throws when x lies outside the family's domain.
  std::function<void(const Eigen::VectorXd&)> base_check;

  void check_base(const Eigen::VectorXd& x) const {
    if (x.size() != dim) throw InvalidInput("base point has the wrong dimension");
    if (base_check) base_check(x);
  }

  template <class Scalar>
  Scalar eval_F(std::span<const Scalar> x, std::span<const Scalar> y) const {
    return F.evaluate<Scalar>(x, y, params);
  }
  double eval_F(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return F.evaluate<double>(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                              std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), params);
  }
};

struct FlagPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Validates dimension, homogeneity (1e-8 over seeded samples), positivity and
/// the volume form, then returns the finished model.
MetricModel finalize_model(MetricModel model);

/// Throws InvalidInput unless y != 0, F(x, y) > 0 and x is admissible.
void validate_flag_point(const MetricModel& model, const FlagPoint& p);

}  // namespace finsler
