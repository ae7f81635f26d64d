#pragma once

// Coordinate tensors of a Finsler metric at a flag point (x, y).
//
// Everything flows from one jet: P = F^2 expanded over the 2n variables
// (dx, dy) at (x, y). From P we read
//   g_ij  = 1/2 P_{y^i y^j}                      fundamental tensor
//   A_ijk = 1/4 F P_{y^i y^j y^k}                Cartan tensor
//   G^i   = 1/4 g^{il} (P_{x^k y^l} y^k - P_{x^l}) spray coefficients
//   N^i_j = dG^i/dy^j,  E_ij = d^3 G^m / dy^i dy^j dy^m
//   tau   = ln(sqrt(det g) / sigma(x)),  S = y^i tau_{x^i} - y^i N^j_i tau_{y^j}
// Every derived object is itself a jet in dy, so fibre computations can keep
// differentiating it.

#include <Eigen/Core>

#include <vector>

#include "finsler/jet.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

/// sigma(x) and its gradient of ln sigma.
struct VolumeAt {
  double sigma{1.0};
  Eigen::VectorXd dlog_sigma;
};

VolumeAt volume_at(const MetricModel& model, const Eigen::VectorXd& x);

/// sigma_BH(x) = vol(B^n) / vol{y : F(x, y) < 1}, i.e. 1 / mean_{S^{n-1}} F^{-n}.
/// Throws QuadratureError when the coarse/fine estimates differ by more than 1e-6 relative.
double bh_volume_coefficient(const MetricModel& model, const Eigen::VectorXd& x);

/// Jets in dy (n variables) at a fixed flag point. A member is filled only when
/// the requested order covers it; `order` is the order of F2.
struct AmbientJets {
  int n{0};
  int order{0};
  Eigen::VectorXd x, y;

  Jet F2;            // order K
  JetMatrix g;       // K-2
  JetMatrix g_inv;   // K-2
  Jet log_det_g;     // K-2
  Tensor<Jet> A;     // K-3
  JetVector G;       // K-2
  JetMatrix N;       // K-3, N(i, j) = dG^i/dy^j
  Jet div_G;         // K-3
  JetMatrix E_hat;   // K-5
  Jet tau;           // K-2
  Jet S;             // K-3
  Jet S_alt;         // K-3

  bool has_g() const { return order >= 2; }
  bool has_A() const { return order >= 3; }
  bool has_S() const { return order >= 3; }
  bool has_E() const { return order >= 5; }
};

/// The volume is evaluated from the model unless supplied.
AmbientJets ambient_jets(const MetricModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order,
                         const VolumeAt* volume = nullptr);

struct CoordinateTensors {
  double F{0.0};
  Eigen::MatrixXd g, g_inv;
  Tensor<double> A;
  Eigen::VectorXd G;
  Eigen::MatrixXd N;
  Eigen::MatrixXd E_hat;
  double tau{0.0};
  double S{0.0};
  double S_alt{0.0};
};

CoordinateTensors coordinate_tensors(const MetricModel& model, const FlagPoint& p);

Eigen::MatrixXd fundamental_tensor(const MetricModel& model, const FlagPoint& p);
Tensor<double> cartan_tensor(const MetricModel& model, const FlagPoint& p);
Eigen::VectorXd spray_coefficients(const MetricModel& model, const FlagPoint& p);
Eigen::MatrixXd nonlinear_connection(const MetricModel& model, const FlagPoint& p);
Eigen::MatrixXd mean_berwald(const MetricModel& model, const FlagPoint& p);
double distortion(const MetricModel& model, const FlagPoint& p);
double s_curvature(const MetricModel& model, const FlagPoint& p);
double s_curvature_alt(const MetricModel& model, const FlagPoint& p);

}  // namespace finsler
