#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "finsler/identity_checks.hpp"
#include "finsler/parallel.hpp"
#include "finsler/zoo.hpp"

using namespace finsler;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) out[k++] = d;
  return out;
}

VolumeForm bh() { return {VolumeKind::busemann_hausdorff, {}}; }

// Worst residual of `fn` over a seeded sample of the model.
template <class Fn>
double worst_over(const MetricModel& m, int base, int fibre, std::uint64_t seed, Fn fn, double sign = +1.0) {
  const SampleSet s = draw_samples(m, {base, fibre, seed, 0});
  double w = 0.0;
  for (std::size_t b = 0; b < s.base.size(); ++b) {
    const VolumeAt vol = volume_at(m, s.base[b]);
    for (const auto& p : s.fibre[b]) w = std::max(w, fn(restrict_fields(m, p, vol, sign)));
  }
  return w;
}

double pde(const RestrictedFields& f) { return check_pde(f).relative(); }
double codazzi(const RestrictedFields& f) { return check_codazzi(f).relative(); }
double cartan_sym(const RestrictedFields& f) { return check_cartan_symmetry(f).relative(); }
double gauss(const RestrictedFields& f) { return check_gauss(f).relative(); }
double iso(const RestrictedFields& f) { return isotropy_residual(f); }
double h_size(const RestrictedFields& f) { return max_abs(f.H); }

}  // namespace

TEST_CASE("S-curvature PDE residual") {
  CHECK(worst_over(build_metric("riemannian", 3, {}, {VolumeKind::riemannian_auto, {}}), 2, 10, 1, pde) <= 1e-9);
  CHECK(worst_over(build_metric("funk", 3, {}, bh()), 2, 10, 2, pde) <= 1e-5);
  CHECK(worst_over(build_metric("randers", 3), 1, 50, 3, pde) <= 1e-5);
  CHECK(worst_over(build_metric("randers", 3, {}, bh()), 1, 20, 4, pde) <= 1e-5);
}

TEST_CASE("Cartan pullback sign: the opposite sign breaks the PDE on Randers") {
  const MetricModel m = build_metric("randers", 3);
  CHECK(worst_over(m, 2, 10, 5, pde, +1.0) <= 1e-5);
  CHECK(worst_over(m, 2, 10, 5, pde, -1.0) > 1e-3);
  CHECK(worst_over(m, 2, 10, 5, codazzi, -1.0) > 1e-3);
}

TEST_CASE("Codazzi residual of the mean Berwald curvature") {
  CHECK(worst_over(build_metric("riemannian", 3), 2, 10, 1, codazzi) <= 1e-10);
  CHECK(worst_over(build_metric("funk", 3, {}, bh()), 2, 10, 2, codazzi) <= 1e-5);
  CHECK(worst_over(build_metric("randers", 3), 1, 50, 3, codazzi) <= 1e-4);
}

TEST_CASE("symmetry of the derivative of the Cartan tensor") {
  CHECK(worst_over(build_metric("riemannian", 3), 1, 10, 1, cartan_sym) <= 1e-12);
  CHECK(worst_over(build_metric("quartic", 3), 1, 50, 2, cartan_sym) <= 1e-5);
  CHECK(worst_over(build_metric("randers", 3), 1, 50, 3, cartan_sym) <= 1e-5);
}

TEST_CASE("Gauss equation of the fibre") {
  CHECK(worst_over(build_metric("euclidean", 3), 2, 10, 1, gauss) <= 1e-7);
  const MetricModel q = build_metric("quartic", 3);
  CHECK(worst_over(q, 1, 50, 2, gauss) <= 1e-5);
  CHECK(worst_over(q, 1, 50, 2, h_size) > 0.1);
  CHECK(worst_over(build_metric("randers", 3), 1, 50, 3, gauss) <= 1e-5);
}

TEST_CASE("isotropy residual") {
  CHECK(worst_over(build_metric("funk", 3, {}, bh()), 2, 10, 1, iso) <= 1e-6);
  CHECK(worst_over(build_metric("riemannian", 3), 2, 10, 1, iso) == 0.0);
  CHECK(worst_over(build_metric("randers", 3), 2, 20, 1, iso) > 1e-2);
}

TEST_CASE("fibre sampling") {
  const MetricModel q = build_metric("quartic", 3);
  Rng rng(7);
  const auto pts = sample_fibre_points(q, Eigen::VectorXd::Zero(3), 200, rng);
  CHECK(pts.size() == 200);
  for (const auto& p : pts) {
    CHECK(p.u.norm() <= 1.0 + 1e-12);
    const Eigen::VectorXd th = stereographic_inverse(p.chart.id, p.u);
    CHECK(th.cwiseAbs().minCoeff() >= q.direction_margin);
  }
  const MetricModel r = build_metric("randers", 3);
  const SampleSet s = draw_samples(r, {5, 7, 42, 0});
  CHECK(s.base.size() == 5);
  for (const auto& x : s.base) CHECK(x.norm() <= r.base_radius);
  for (const auto& f : s.fibre) CHECK(f.size() == 7);
  CHECK_THROWS_AS(draw_samples(r, {0, 7, 42, 0}), InvalidInput);
}

TEST_CASE("run_checks reports are deterministic and consistent") {
  const MetricModel r = build_metric("randers", 3);
  const auto a = run_checks(r, {2, 6, 42, 1}, default_tolerances());
  const auto b = run_checks(r, {2, 6, 42, 8}, default_tolerances());
  REQUIRE(a.size() == 4);
  const char* tags[] = {"eq-1.11", "eq-1.12", "eq-2.1", "eq-2.2"};
  for (std::size_t c = 0; c < a.size(); ++c) {
    CHECK(a[c].tag == tags[c]);
    CHECK(a[c].samples == 12);
    CHECK(a[c].pass == (a[c].max_residual <= a[c].tolerance));
    CHECK(a[c].pass);
    REQUIRE(a[c].points.size() == b[c].points.size());
    for (std::size_t k = 0; k < a[c].points.size(); ++k) {
      CHECK(a[c].points[k].residual == b[c].points[k].residual);  // bitwise, any thread count
      CHECK(a[c].points[k].base == static_cast<int>(k / 6));
    }
  }
  Tolerances strict = default_tolerances();
  strict["eq-2.1"] = 0.0;
  const auto s = run_checks(r, {1, 3, 42, 0}, strict);
  CHECK(s[2].tolerance == 0.0);
  CHECK(s[2].pass == (s[2].max_residual == 0.0));
}

TEST_CASE("Schur audit verdicts") {
  const MetricModel funk = build_metric("funk", 3, {}, bh());
  Rng rng(42);
  const Eigen::VectorXd x = vec({0.3, 0.1, 0});
  const auto fibre = sample_fibre_points(funk, x, 40, rng);
  const AuditRecord a = schur_audit(funk, x, fibre, {});
  CHECK(a.verdict == Verdict::isotropic_and_constant);
  CHECK(a.asserted);
  CHECK(std::abs(a.e_mean - 4.0) <= 1e-5);
  CHECK(a.e_spread <= 1e-5);
  CHECK(a.max_grad_e <= 1e-5);

  const MetricModel euc = build_metric("euclidean", 3);
  const AuditRecord e = schur_audit(euc, x, sample_fibre_points(euc, x, 20, rng), {});
  CHECK(e.verdict == Verdict::isotropic_and_constant);
  CHECK(std::abs(e.e_mean) <= 1e-12);

  const MetricModel r = build_metric("randers", 3);
  const Eigen::VectorXd xr = vec({0.8, -0.5, 0.3});
  const AuditRecord ra = schur_audit(r, xr, sample_fibre_points(r, xr, 20, rng), {});
  CHECK(ra.verdict == Verdict::non_isotropic);
  CHECK_FALSE(ra.asserted);

  const MetricModel r2 = build_metric("randers", 2);
  const AuditRecord two = schur_audit(r2, vec({0.5, 0.2}), sample_fibre_points(r2, vec({0.5, 0.2}), 20, rng), {});
  CHECK(two.verdict == Verdict::isotropic_unasserted);
  CHECK_FALSE(two.asserted);

  CHECK(to_string(Verdict::violation) == "VIOLATION");
  CHECK(to_string(Verdict::isotropic_and_constant) == "isotropic-and-constant");
}

TEST_CASE("weak isotropy of the S-curvature") {
  Rng rng(3);
  const MetricModel funk = build_metric("funk", 3, {}, bh());
  const Eigen::VectorXd x = vec({0.2, -0.4, 0.1});
  const WeakIsotropyRecord w = weak_isotropy_check(funk, x, sample_fibre_points(funk, x, 20, rng));
  CHECK(w.c == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(w.max_hessian_residual <= 1e-5);

  const MetricModel q = build_metric("quartic", 3);
  const WeakIsotropyRecord wq = weak_isotropy_check(q, x, sample_fibre_points(q, x, 10, rng));
  CHECK(std::abs(wq.c) <= 1e-12);
  CHECK(wq.max_hessian_residual <= 1e-12);

  // Riemannian with a volume unrelated to sqrt(det a): S is linear in y.
  VolumeForm custom{VolumeKind::custom, Expr::parse("exp(x1 - x2^2) * (2 + x3)", 3)};
  const MetricModel rm = build_metric("riemannian", 3, {{"a11", "1 + x2^2"}, {"a22", "2"}, {"a33", "1 + x1^2"}}, custom);
  const Eigen::VectorXd xr = vec({0.2, 0.1, -0.3});
  const auto fibre = sample_fibre_points(rm, xr, 10, rng);
  const WeakIsotropyRecord wr = weak_isotropy_check(rm, xr, fibre, 0.0);
  CHECK(wr.max_hessian_residual <= 1e-6);
  double s_size = 0.0;
  for (const auto& p : fibre) s_size = std::max(s_size, std::abs(restrict_fields(rm, p).S));
  CHECK(s_size > 1e-2);  // S itself is not zero

  CHECK_THROWS_AS(weak_isotropy_check(build_metric("funk", 2), vec({0, 0}), {}), InvalidInput);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 7);
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(
                      100,
                      [](std::size_t i) {
                        if (i == 37) throw std::runtime_error("boom");
                      },
                      4),
                  std::runtime_error);
}
