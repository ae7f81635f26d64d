#include "doctest.h"

#include <array>
#include <cmath>

#include "finsler/finite_difference.hpp"
#include "finsler/finsler_core.hpp"
#include "finsler/quadrature.hpp"
#include "finsler/rng.hpp"
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
VolumeForm riem_auto() { return {VolumeKind::riemannian_auto, {}}; }

// Closed-form Funk metric, written out independently of the zoo text.
double funk_closed(const double* x, const double* y, int n) {
  double xy = 0, xx = 0, yy = 0;
  for (int i = 0; i < n; ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  return (std::sqrt(xy * xy + yy * (1 - xx)) + xy) / (1 - xx);
}

// F of a model as a function of the 2n stacked coordinates (x, y).
ScalarFunction stacked(const MetricModel& m, double power = 1.0) {
  return [&m, power](std::span<const double> p) {
    const int n = m.dim;
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(p.data() + n, n);
    return std::pow(m.eval_F(x, y), power);
  };
}

}  // namespace

TEST_CASE("quadrature rules integrate the sphere") {
  for (int pts : {302, 590}) {
    const auto& r = lebedev_rule(pts);
    CHECK(r.nodes.size() == static_cast<std::size_t>(pts));
    double w = 0;
    for (double v : r.weights) w += v;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    for (const auto& p : r.nodes) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
    // mean of z^2 is 1/3, of x^2 y^2 z^2 is 1/105
    CHECK(r.mean([](const Eigen::VectorXd& p) { return p[2] * p[2]; }) == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(r.mean([](const Eigen::VectorXd& p) { return p[0] * p[0] * p[1] * p[1] * p[2] * p[2]; }) ==
          doctest::Approx(1.0 / 105).epsilon(1e-12));
  }
  std::vector<double> t, w;
  gauss_legendre(5, t, w);
  double s4 = 0;
  for (std::size_t k = 0; k < t.size(); ++k) s4 += w[k] * std::pow(t[k], 8);
  CHECK(s4 == doctest::Approx(2.0 / 9).epsilon(1e-13));
  const SphereRule r4 = product_sphere_rule(4, 16);
  CHECK(r4.mean([](const Eigen::VectorXd& p) { return p[0] * p[0]; }) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r4.mean([](const Eigen::VectorXd& p) { return p[3] * p[3] * p[1] * p[1]; }) ==
        doctest::Approx(1.0 / 24).epsilon(1e-12));
}

TEST_CASE("fundamental tensor examples") {
  const auto e = build_metric("euclidean", 3);
  CHECK((fundamental_tensor(e, {vec({0.1, 0.2, 0.3}), vec({1, -2, 0.5})}) - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-14);

  const auto r = build_metric("riemannian", 2);
  Eigen::MatrixXd g = fundamental_tensor(r, {vec({0.1, 0.2}), vec({0.3, -1})});
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 1) == doctest::Approx(4.0));
  CHECK(std::abs(g(0, 1)) <= 1e-14);

  const auto q = build_metric("quartic", 3);
  const FlagPoint p{vec({0, 0, 0}), vec({1, 1, 1})};
  g = fundamental_tensor(q, p);
  CHECK(g(0, 0) == doctest::Approx(g(1, 1)));
  CHECK(g(0, 1) == doctest::Approx(g(1, 2)));
  CHECK(g(0, 1) < 0.0);
  auto half_f2 = [&q](std::span<const double> y) {
    return 0.5 * std::pow(q.eval_F(Eigen::VectorXd::Zero(3), Eigen::Map<const Eigen::VectorXd>(y.data(), 3)), 2);
  };
  const std::array<double, 3> y{1, 1, 1};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      std::array<int, 3> a{0, 0, 0};
      a[i] += 1;
      a[j] += 1;
      CHECK(std::abs(g(i, j) - finite_difference_oracle(half_f2, y, a, 1e-3)) <= 1e-6);
    }
  }
}

TEST_CASE("non-Finsler input is reported with its smallest eigenvalue") {
  const auto q = build_metric("quartic", 2);
  try {
    (void)fundamental_tensor(q, {vec({0, 0}), vec({1, 0})});
    FAIL("expected NonPositiveDefinite");
  } catch (const NonPositiveDefinite& e) {
    CHECK(std::abs(e.smallest_eigenvalue()) <= 1e-10);
  }
}

TEST_CASE("Cartan tensor") {
  const auto r = build_metric("riemannian", 3);
  CHECK(max_abs(cartan_tensor(r, {vec({0.1, 0, 0.2}), vec({1, 2, 3})})) <= 1e-12);

  const auto q = build_metric("quartic", 2);
  // At y = (1, 1) the reflection symmetry forces A = 0; (1, 0.5) is generic.
  CHECK(max_abs(cartan_tensor(q, {vec({0, 0}), vec({1, 1})})) <= 1e-10);
  const Eigen::VectorXd y = vec({1, 0.5});
  const Tensor<double> A = cartan_tensor(q, {vec({0, 0}), y});
  CHECK(max_abs(A) > 0.01);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double c = 0;
      for (int k = 0; k < 2; ++k) {
        c += A(i, j, k) * y[k];
        CHECK(A(i, j, k) == doctest::Approx(A(j, k, i)));
        CHECK(A(i, j, k) == doctest::Approx(A(k, j, i)));
      }
      CHECK(std::abs(c) <= 1e-10);
    }
  }

  // Randers: 1/4 F [F^2]_{yyy} by finite differences of the plain evaluation.
  const auto rd = build_metric("randers", 3);
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd x = uniform_in_ball(rng, 3, 1.5);
    const Eigen::VectorXd yy = uniform_on_sphere(rng, 3);
    const Tensor<double> At = cartan_tensor(rd, {x, yy});
    const double F = rd.eval_F(x, yy);
    auto f2 = [&](std::span<const double> v) { return std::pow(rd.eval_F(x, Eigen::Map<const Eigen::VectorXd>(v.data(), 3)), 2); };
    const std::array<double, 3> yp{yy[0], yy[1], yy[2]};
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        for (int k = j; k < 3; ++k) {
          std::array<int, 3> a{0, 0, 0};
          a[i]++;
          a[j]++;
          a[k]++;
          const double fd = 0.25 * F * finite_difference_oracle(f2, yp, a, 2e-3);
          CHECK(std::abs(At(i, j, k) - fd) <= 1e-5);
        }
      }
    }
  }
}

TEST_CASE("spray coefficients") {
  const auto q = build_metric("quartic", 3);
  CHECK(spray_coefficients(q, {vec({0.3, 0, 0}), vec({1, 0.5, 0.2})}).cwiseAbs().maxCoeff() <= 1e-14);

  // Funk: the closed form satisfies F_x = F F_y (checked here by finite
  // differences); that PDE gives G = F y / 2.
  const auto f = build_metric("funk", 3);
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = uniform_in_ball(rng, 3, 0.8);
    const Eigen::VectorXd y = uniform_on_sphere(rng, 3) * rng.uniform(0.5, 2.0);
    std::array<double, 6> p{x[0], x[1], x[2], y[0], y[1], y[2]};
    ScalarFunction closed = [](std::span<const double> s) { return funk_closed(s.data(), s.data() + 3, 3); };
    const double F = closed(p);
    CHECK(F == doctest::Approx(f.eval_F(x, y)).epsilon(1e-13));
    for (int k = 0; k < 3; ++k) {
      std::array<int, 6> ax{}, ay{};
      ax[k] = 1;
      ay[3 + k] = 1;
      const double fx = finite_difference_oracle(closed, p, ax, 1e-4);
      const double fy = finite_difference_oracle(closed, p, ay, 1e-4);
      CHECK(std::abs(fx - F * fy) <= 1e-8 * std::max(1.0, std::abs(fx)));
    }
    const Eigen::VectorXd G = spray_coefficients(f, {x, y});
    CHECK((G - 0.5 * F * y).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, G.norm()));
  }

  const auto rd = build_metric("randers", 3);
  const Eigen::VectorXd x = vec({0.4, -0.3, 0.8});
  const Eigen::VectorXd y = vec({0.2, 1.0, -0.6});
  const Eigen::VectorXd G1 = spray_coefficients(rd, {x, y});
  const Eigen::VectorXd G2 = spray_coefficients(rd, {x, 2.0 * y});
  CHECK((G2 - 4.0 * G1).cwiseAbs().maxCoeff() <= 1e-10 * G2.cwiseAbs().maxCoeff());
}

TEST_CASE("mean Berwald curvature") {
  const auto q = build_metric("quartic", 3);
  CHECK(mean_berwald(q, {vec({0.1, 0.2, 0}), vec({1, 0.4, 0.3})}).cwiseAbs().maxCoeff() <= 1e-10);

  const auto rd = build_metric("randers", 3);
  Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    const FlagPoint p{uniform_in_ball(rng, 3, 2.0), uniform_on_sphere(rng, 3)};
    const Eigen::MatrixXd E = mean_berwald(rd, p);
    CHECK((E - E.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((E * p.y).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1e-300, E.cwiseAbs().maxCoeff()));
  }

  // Funk at x = 0: E = Hess_y of 2F, which equals 2 (I - y y^T / |y|^2) / |y|.
  const auto f = build_metric("funk", 3);
  const Eigen::VectorXd y = vec({0.3, -0.5, 0.8});
  const Eigen::MatrixXd E = mean_berwald(f, {vec({0, 0, 0}), y});
  const Eigen::MatrixXd expect = 2.0 * (Eigen::MatrixXd::Identity(3, 3) - y * y.transpose() / y.squaredNorm()) / y.norm();
  CHECK((E - expect).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("Busemann-Hausdorff volume") {
  CHECK(bh_volume_coefficient(build_metric("euclidean", 3), vec({0.2, 0.1, 0})) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(bh_volume_coefficient(build_metric("euclidean", 2), vec({0.2, 0.1})) == doctest::Approx(1.0).epsilon(1e-8));
  // The unit ball of diag(1, 4) is an ellipse with semi-axes 1 and 1/2.
  CHECK(std::abs(bh_volume_coefficient(build_metric("riemannian", 2), vec({0, 0})) - 2.0) <= 1e-6);
  const auto f = build_metric("funk", 3);
  for (auto x : {vec({0, 0, 0}), vec({0.5, 0.2, -0.1}), vec({0.9, 0, 0}), vec({0.3, -0.6, 0.5})}) {
    CHECK(std::abs(bh_volume_coefficient(f, x) - 1.0) <= 1e-6);
  }
  CHECK(std::abs(bh_volume_coefficient(build_metric("funk", 2), vec({0.6, 0.3})) - 1.0) <= 1e-6);
}

TEST_CASE("distortion") {
  CHECK(std::abs(distortion(build_metric("euclidean", 3), {vec({0.1, 0, 0}), vec({1, 2, 3})})) <= 1e-14);
  CHECK(std::abs(distortion(build_metric("riemannian", 2, {}, riem_auto()), {vec({0.1, 0}), vec({1, 2})})) <= 1e-14);
  const auto q = build_metric("quartic", 3);
  const FlagPoint p{vec({0, 0, 0}), vec({1, 0.4, 0.3})};
  const double t1 = distortion(q, p);
  CHECK(std::abs(distortion(q, {p.x, 2.0 * p.y}) - t1) <= 1e-10);
  CHECK(std::abs(distortion(q, {p.x, vec({0.3, 1, 0.6})}) - t1) > 1e-3);
}

TEST_CASE("S-curvature examples") {
  const auto f = build_metric("funk", 3, {}, bh());
  CHECK(std::abs(s_curvature(f, {vec({0, 0, 0}), vec({0, 0, 2})}) - 4.0) <= 1e-6);
  const FlagPoint p{vec({0.5, 0, 0}), vec({0, 1, 0})};
  CHECK(f.eval_F(p.x, p.y) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-12));
  CHECK(std::abs(s_curvature(f, p) - 2.0 / std::sqrt(0.75)) <= 1e-5);
  CHECK(std::abs(s_curvature_alt(f, p) - 2.0 / std::sqrt(0.75)) <= 1e-5);

  TextParams a{{"a11", "1 + x2^2"}, {"a22", "2 + x1*x3"}, {"a12", "0.3*x3"}, {"a33", "exp(x1)"}};
  const auto r = build_metric("riemannian", 3, a, riem_auto());
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const FlagPoint q{uniform_in_ball(rng, 3, 0.5), uniform_on_sphere(rng, 3)};
    CHECK(std::abs(s_curvature(r, q)) <= 1e-6);
    CHECK(std::abs(s_curvature_alt(r, q)) <= 1e-6);
  }
  // With the Lebesgue volume the same metric has S = y^m d_m ln sqrt(det a), linear in y.
  const auto rl = build_metric("riemannian", 3, a);
  const FlagPoint q{vec({0.2, -0.1, 0.3}), vec({0.5, 1, -0.2})};
  const double s1 = s_curvature(rl, q);
  CHECK(std::abs(s1) > 1e-3);
  CHECK(s_curvature(rl, {q.x, -q.y}) == doctest::Approx(-s1).epsilon(1e-10));
  CHECK(s_curvature_alt(rl, q) == doctest::Approx(s1).epsilon(1e-10));
}

TEST_CASE("Euler identities at random zoo points") {
  Rng rng(77);
  for (const char* id : {"euclidean", "riemannian", "minkowski_quartic", "randers", "funk_ball"}) {
    for (int n : {2, 3}) {
      const auto m = build_metric(id, n);
      for (int t = 0; t < 10; ++t) {
        const Eigen::VectorXd x = uniform_in_ball(rng, n, m.base_radius);
        Eigen::VectorXd y = uniform_on_sphere(rng, n) * rng.uniform(0.5, 2.0);
        if (y.cwiseAbs().minCoeff() < 0.1 * y.norm()) continue;
        const CoordinateTensors c = coordinate_tensors(m, {x, y});
        CHECK(std::abs(y.dot(c.g * y) - c.F * c.F) <= 1e-8 * c.F * c.F);
        const double a_scale = std::max(max_abs(c.A), 1e-300);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            double s = 0;
            for (int k = 0; k < n; ++k) s += c.A(i, j, k) * y[k];
            CHECK(std::abs(s) <= 1e-9 * std::max(a_scale, 1.0));
          }
        }
        CHECK((c.E_hat * y).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, c.E_hat.cwiseAbs().maxCoeff()));
        const CoordinateTensors c2 = coordinate_tensors(m, {x, 1.7 * y});
        CHECK((c2.G - 1.7 * 1.7 * c.G).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, c2.G.cwiseAbs().maxCoeff()));
        CHECK(std::abs(c2.S - 1.7 * c.S) <= 1e-8 * std::max(1.0, std::abs(c2.S)));
        CHECK(std::abs(c.S - c.S_alt) <= 1e-7 * std::max(1.0, std::abs(c.S)));
      }
    }
  }
}
