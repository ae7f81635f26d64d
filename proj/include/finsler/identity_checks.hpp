#pragma once

// Residuals of the fibre identities at indicatrix points, and the Schur audit.
//
//   eq-2.1   S;ab + H_ab^c S;c + S g_ab - E_ab                      = 0
//   eq-2.2   E_ab;c - E_ac;b - H_ab^d E_dc + H_ac^d E_db            = 0
//   eq-1.11  H_abc;d symmetric under exchange of d with any slot
//   eq-1.12  R_abcd - [H_bec H^e_ad - H_bed H^e_ac + g_ac g_bd - g_ad g_bc] = 0
//   ricci    S;abc - S;acb - S;e R^e_abc                             = 0
//
// R is the classical Riemann tensor of the fibre (see indicatrix.hpp). The
// structure equation is usually written with the curvature indices in the
// order (b, a, c, d); swapping the first pair is the frozen mapping onto the
// classical tensor, fixed by the round-sphere case H = 0.
//
// Each residual is the max-abs component divided by max(1, largest term).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/indicatrix.hpp"
#include "finsler/rng.hpp"

namespace finsler {

struct Residual {
  Tensor<double> value;
  double scale{1.0};

  double relative() const { return max_abs(value) / scale; }
};

Residual check_pde(const RestrictedFields& f);
Residual check_codazzi(const RestrictedFields& f);
Residual check_cartan_symmetry(const RestrictedFields& f);
Residual check_gauss(const RestrictedFields& f);
/// Commutator of the second covariant derivatives of the covector S;a.
Residual check_ricci(const RestrictedFields& f);
/// Antisymmetric part of S;ab (covariant derivatives of a scalar commute).
Residual check_scalar_ricci(const RestrictedFields& f);

Residual check_pde(const MetricModel& model, const IndicatrixPoint& p);
Residual check_codazzi(const MetricModel& model, const IndicatrixPoint& p);
Residual check_cartan_symmetry(const MetricModel& model, const IndicatrixPoint& p);
Residual check_gauss(const MetricModel& model, const IndicatrixPoint& p);

/// |E - (e / (n - 1)) g| / max(1, |E|), max-abs norms.
double isotropy_residual(const RestrictedFields& f);
double isotropy_residual(const MetricModel& model, const IndicatrixPoint& p);

// Sampling ---------------------------------------------------------------

/// Base points uniform in the model's base ball.
std::vector<Eigen::VectorXd> sample_base_points(const MetricModel& model, int count, Rng& rng);
/// Fibre points from uniform directions, each expressed in the chart where |u| <= 1.
/// Directions within 1e-6 of a chart pole, or closer than the model's margin to
/// a coordinate hyperplane, are redrawn.
std::vector<IndicatrixPoint> sample_fibre_points(const MetricModel& model, const Eigen::VectorXd& x, int count,
                                                 Rng& rng);

struct SamplePlan {
  int base_points{5};
  int fibre_points{50};
  std::uint64_t seed{42};
  unsigned threads{0};
};

/// Base points followed, per base point, by its fibre points: one sequential
/// stream from the seed, independent of the thread count.
struct SampleSet {
  std::vector<Eigen::VectorXd> base;
  std::vector<std::vector<IndicatrixPoint>> fibre;
};
SampleSet draw_samples(const MetricModel& model, const SamplePlan& plan);

// Reports ----------------------------------------------------------------

struct PointResidual {
  int base{0};
  int fibre{0};
  Eigen::VectorXd x;
  ChartId chart{ChartId::north};
  Eigen::VectorXd u;
  double residual{0.0};
  std::string error;  // nonempty when the point could not be evaluated
};

struct CheckReport {
  std::string tag;
  std::string name;
  std::string metric_id;
  int dim{0};
  std::uint64_t seed{0};
  int samples{0};
  std::vector<PointResidual> points;
  double max_residual{0.0};
  double tolerance{0.0};
  bool pass{false};
};

using Tolerances = std::map<std::string, double>;

/// eq-1.11 1e-5, eq-1.12 1e-5, eq-2.1 1e-5, eq-2.2 1e-4, thm-1 1e-5.
Tolerances default_tolerances();

/// The four structure checks (eq-1.11, eq-1.12, eq-2.1, eq-2.2), in that order.
std::vector<CheckReport> run_checks(const MetricModel& model, const SamplePlan& plan, const Tolerances& tolerances);

// Schur audit ------------------------------------------------------------

enum class Verdict { isotropic_and_constant, non_isotropic, violation, isotropic_unasserted };
std::string to_string(Verdict v);

struct AuditTolerances {
  double isotropy{1e-5};
  double constancy{1e-5};
};

struct FibreSample {
  IndicatrixPoint point;
  double e{0.0};
  double grad_e{0.0};  // g-norm of e;a
  double isotropy{0.0};
};

struct AuditRecord {
  Eigen::VectorXd x;
  std::vector<FibreSample> samples;
  double max_isotropy_residual{0.0};
  double e_mean{0.0};
  double e_spread{0.0};
  double max_grad_e{0.0};
  bool asserted{false};
  Verdict verdict{Verdict::non_isotropic};
};

AuditRecord schur_audit(const MetricModel& model, const Eigen::VectorXd& x,
                        const std::vector<IndicatrixPoint>& fibre, const AuditTolerances& tol, unsigned threads = 0);

struct WeakIsotropyRecord {
  double c{0.0};
  double max_hessian_residual{0.0};
  int samples{0};
};

/// y-Hessian of S - c F at each fibre point, with c = e / (n - 1) averaged over the fibre.
WeakIsotropyRecord weak_isotropy_check(const MetricModel& model, const Eigen::VectorXd& x,
                                       const std::vector<IndicatrixPoint>& fibre, unsigned threads = 0);
/// Same with c given.
WeakIsotropyRecord weak_isotropy_check(const MetricModel& model, const Eigen::VectorXd& x,
                                       const std::vector<IndicatrixPoint>& fibre, double c, unsigned threads = 0);

}  // namespace finsler
