#pragma once

// Riemannian geometry of a fibre S_xM = {y : F(x, y) = 1}.
//
// The parameter sphere S^{n-1} is covered by two stereographic charts
//   north: theta(u) = (2u, 1 - |u|^2) / (1 + |u|^2)   (u = 0 at e_n)
//   south: theta(u) = (2u, |u|^2 - 1) / (1 + |u|^2)   (u = 0 at -e_n)
// related by u_S = u_N / |u_N|^2, and the fibre is the radial graph
// y(u) = theta(u) / F(x, theta(u)). All fields are built as jets in u by
// composing the ambient dy-jets with y(u) - y(u0), so u-derivatives of any
// order come out exact to roundoff.
//
// Index conventions: Gamma(c, a, b) = Gamma^c_ab; covariant derivative slots
// are appended last, T_{a...;d}; the Riemann tensor is
//   R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb,
// lowered on the first slot, so the round sphere has R_abcd = g_ac g_bd - g_ad g_bc.

#include <Eigen/Core>

#include "finsler/finsler_core.hpp"
#include "finsler/metric.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

enum class ChartId { north, south };

std::string to_string(ChartId id);

struct FibreChart {
  Eigen::VectorXd x;
  ChartId id{ChartId::north};
};

struct IndicatrixPoint {
  FibreChart chart;
  Eigen::VectorXd u;
};

/// Charts are valid for |u| < 4.
inline constexpr double kChartRadius = 4.0;

Eigen::VectorXd stereographic_inverse(ChartId id, const Eigen::VectorXd& u);
Eigen::VectorXd stereographic(ChartId id, const Eigen::VectorXd& theta);
/// Chart in which the direction has |u| <= 1 (north when theta_n >= 0).
IndicatrixPoint chart_point(const Eigen::VectorXd& x, const Eigen::VectorXd& theta);
/// The same fibre point expressed in the other chart.
IndicatrixPoint other_chart(const IndicatrixPoint& p);
/// d u_other / d u at p (the inversion u / |u|^2 is its own inverse).
Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& u);

FlagPoint chart_embed(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u);
Eigen::MatrixXd induced_metric(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u);
Tensor<double> christoffels(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u);
Tensor<double> riemann(const MetricModel& model, const FibreChart& chart, const Eigen::VectorXd& u);

/// T_{a1..ak;d} = d_d T - sum_s Gamma^e_{d a_s} T_{..e..}. The result has the
/// jet order of the input minus one.
Tensor<Jet> covariant_derivative(const Tensor<Jet>& field, const Tensor<Jet>& gamma);

struct RestrictedFields {
  int m{0};  // fibre dimension n - 1
  Eigen::VectorXd x, y, u;
  ChartId chart{ChartId::north};
  Eigen::MatrixXd Y;  // n x m, dy/du

  Eigen::MatrixXd g, g_inv;
  Tensor<double> gamma;   // Gamma^c_ab
  Tensor<double> R;       // R_abcd
  Tensor<double> dg;      // g_{ab;c}

  double S{0.0};
  Eigen::VectorXd S_a;
  Eigen::MatrixXd S_ab;   // S_{;a;b}
  Tensor<double> S_abc;   // S_{;a;b;c}

  Tensor<double> H;       // H_abc
  Tensor<double> dH;      // H_{abc;d}
  Eigen::MatrixXd E;      // E_ab
  Tensor<double> dE;      // E_{ab;c}
  double e{0.0};
  Eigen::VectorXd e_a;
};

/// Sign of the Cartan pullback H_abc = sign * A_ijk Y^i_a Y^j_b Y^k_c. The
/// structure equations hold with +1; -1 exists only to demonstrate that.
RestrictedFields restrict_fields(const MetricModel& model, const IndicatrixPoint& point, const VolumeAt& volume,
                                 double cartan_sign = +1.0);
RestrictedFields restrict_fields(const MetricModel& model, const IndicatrixPoint& point);

}  // namespace finsler
