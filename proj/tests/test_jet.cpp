#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "finsler/errors.hpp"
#include "finsler/finite_difference.hpp"
#include "finsler/jet.hpp"

using namespace finsler;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Jet random_jet(std::mt19937_64& gen, int n, int order, double c0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet j(JetLayout::get(n, order));
  for (Eigen::Index k = 0; k < j.coeffs().size(); ++k) j.coeffs()[k] = u(gen);
  j.coeffs()[0] = c0;
  return j;
}

double rel_diff(const Jet& a, const Jet& b) {
  return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff() / std::max(1.0, a.coeffs().cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("layout size is the binomial count for every supported shape") {
  for (int n = 1; n <= kMaxJetVars; ++n) {
    for (int k = 0; k <= 5; ++k) {
      CHECK(JetLayout::get(n, k)->size() == static_cast<std::size_t>(binomial(n + k, k)));
    }
  }
  auto l = JetLayout::get(3, 4);
  for (int d = 0; d <= 4; ++d) CHECK(l->prefix_size(d) == JetLayout::get(3, d)->size());
}

TEST_CASE("seed_variable") {
  Jet t = seed_variable(1, 3.0, 1, 2);
  Jet sq = t * t;
  CHECK(sq.coeffs()[0] == doctest::Approx(9.0));
  CHECK(sq.coeffs()[1] == doctest::Approx(6.0));
  CHECK(sq.coeffs()[2] == doctest::Approx(1.0));

  Jet y = seed_variable(2, 0.0, 2, 1);
  MultiIndex e1{}, e2{};
  e1[0] = 1;
  e2[1] = 1;
  CHECK(y.value() == 0.0);
  CHECK(y.coeff(e1) == 0.0);
  CHECK(y.coeff(e2) == 1.0);

  CHECK_THROWS_AS(seed_variable(3, 1.0, 2, 2), InvalidInput);
  CHECK_THROWS_AS(seed_variable(0, 1.0, 2, 2), InvalidInput);
}

TEST_CASE("mixed partial of a product") {
  Jet x = seed_variable(1, 0.3, 2, 2);
  Jet y = seed_variable(2, -0.7, 2, 2);
  const std::array<int, 2> a{1, 1};
  CHECK(extract_derivative(x * y, a) == doctest::Approx(1.0));
}

TEST_CASE("sqrt series at 4") {
  // Term-by-term binomial series of 2 sqrt(1 + t/4).
  Jet s = sqrt(seed_variable(1, 4.0, 1, 3));
  CHECK(s.coeffs()[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.coeffs()[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.coeffs()[2] == doctest::Approx(-1.0 / 64.0).epsilon(1e-15));
  CHECK(s.coeffs()[3] == doctest::Approx(1.0 / 512.0).epsilon(1e-15));
}

TEST_CASE("domain errors name the function") {
  Jet neg = seed_variable(1, -1.0, 1, 2);
  try {
    (void)log(neg);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.function() == "ln");
    CHECK(e.value() == -1.0);
  }
  CHECK_THROWS_AS((void)sqrt(neg), DomainError);
  CHECK_THROWS_AS((void)pow(neg, 0.5), DomainError);
  CHECK_NOTHROW((void)pow(neg, 3.0));
  CHECK_THROWS_AS((void)(Jet(1.0) / (neg - neg)), DomainError);
}

TEST_CASE("extract_derivative") {
  Jet t = seed_variable(1, 2.0, 1, 3);
  const std::array<int, 1> a3{3};
  CHECK(extract_derivative(t * t * t, a3) == doctest::Approx(6.0));

  Jet e = exp(seed_variable(1, 0.0, 2, 2) + seed_variable(2, 0.0, 2, 2));
  const std::array<int, 2> a11{1, 1};
  CHECK(extract_derivative(e, a11) == doctest::Approx(1.0));

  Jet q = seed_variable(1, 1.0, 2, 2);
  const std::array<int, 2> a21{2, 1};
  CHECK_THROWS_AS((void)extract_derivative(q, a21), InvalidInput);
}

TEST_CASE("mixing layouts is rejected") {
  Jet a = seed_variable(1, 1.0, 2, 2);
  Jet b = seed_variable(1, 1.0, 2, 3);
  CHECK_THROWS_AS((void)(a + b), InvalidInput);
  CHECK_THROWS_AS((void)(a * b), InvalidInput);
}

TEST_CASE("ring axioms and inverse functions on random jets") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const int order = 2 + trial % 5;
    Jet a = random_jet(gen, n, order, 0.7);
    Jet b = random_jet(gen, n, order, -1.3);
    Jet c = random_jet(gen, n, order, 2.1);
    CHECK(rel_diff((a + b) * c, a * c + b * c) <= 1e-12);
    CHECK(rel_diff(a * (b * c), (a * b) * c) <= 1e-12);
    CHECK(rel_diff(a * b, b * a) <= 1e-12);
    Jet p = random_jet(gen, n, order, 1.6);
    CHECK(rel_diff(exp(log(p)), p) <= 1e-11);
    CHECK(rel_diff(sqrt(p) * sqrt(p), p) <= 1e-11);
    CHECK(rel_diff((p / c) * c, p) <= 1e-11);
    CHECK(rel_diff(pow(p, 2.5), p * p * sqrt(p)) <= 1e-11);
    CHECK(rel_diff(pow(p, -2.0) * p * p, Jet(JetLayout::get(n, order)) + 1.0) <= 1e-11);
  }
}

TEST_CASE("differentiate and truncate use the graded prefix") {
  Jet x = seed_variable(1, 0.5, 2, 4);
  Jet y = seed_variable(2, -0.2, 2, 4);
  Jet f = exp(x * y) + x * x * x * y;
  Jet fx = differentiate(f, 0);
  CHECK(fx.order() == 3);
  // d/dx f = y exp(xy) + 3x^2 y
  const std::array<int, 2> a01{0, 1};
  const std::array<int, 2> a11{1, 1};
  const std::array<int, 2> a12{1, 2};
  CHECK(fx.value() == doctest::Approx(-0.2 * std::exp(-0.1) + 3 * 0.25 * -0.2));
  CHECK(extract_derivative(fx, a01) == doctest::Approx(extract_derivative(f, a11)));
  CHECK(extract_derivative(fx, a12) == doctest::Approx(extract_derivative(f, std::array<int, 2>{2, 2})));
  Jet ft = truncate(f, 2);
  CHECK(ft.order() == 2);
  CHECK(ft.coeffs() == f.coeffs().head(6));
}

TEST_CASE("restrict_variables keeps a coordinate slice") {
  Jet x = seed_variable(1, 0.5, 3, 3);
  Jet y = seed_variable(2, 0.1, 3, 3);
  Jet z = seed_variable(3, 0.4, 3, 3);
  Jet f = x * z * z + y;
  const std::array<int, 2> keep{2, 0};
  Jet r = restrict_variables(f, keep);
  CHECK(r.n_vars() == 2);
  // r(s,t) = f(0.5 + t, 0.1, 0.4 + s)
  const std::array<int, 2> a21{2, 1};
  CHECK(extract_derivative(r, a21) == doctest::Approx(2.0));
  CHECK(r.value() == doctest::Approx(0.5 * 0.16 + 0.1));
}

TEST_CASE("composition matches direct evaluation") {
  // outer f(a, b) = exp(a) * b^2 at (0.3, 1.2); inner a = u + v^2, b = u v.
  const int order = 4;
  Jet a = seed_variable(1, 0.3, 2, order);
  Jet b = seed_variable(2, 1.2, 2, order);
  Jet outer = exp(a) * b * b;
  Jet u = seed_variable(1, 0.0, 2, order);
  Jet v = seed_variable(2, 0.0, 2, order);
  JetComposer compose({u + v * v, u * v});
  Jet composed = compose(outer);
  Jet direct = exp(0.3 + u + v * v) * (1.2 + u * v) * (1.2 + u * v);
  CHECK(rel_diff(composed, direct) <= 1e-13);
}

TEST_CASE("finite-difference oracle") {
  ScalarFunction t4 = [](std::span<const double> p) { return std::pow(p[0], 4); };
  const std::array<double, 1> one{1.0};
  const std::array<int, 1> a2{2};
  CHECK(std::abs(finite_difference_oracle(t4, one, a2, 1e-3) - 12.0) <= 1e-6);

  ScalarFunction x2y = [](std::span<const double> p) { return p[0] * p[0] * p[1]; };
  const std::array<double, 2> ones{1.0, 1.0};
  const std::array<int, 2> a11{1, 1};
  CHECK(std::abs(finite_difference_oracle(x2y, ones, a11, 1e-3) - 2.0) <= 1e-6);

  const std::array<int, 1> a5{5};
  CHECK_THROWS_AS((void)finite_difference_oracle(t4, one, a5, 1e-3), InvalidInput);
}

TEST_CASE("jets agree with finite differences up to order 4") {
  auto f_jet = [](const Jet& x, const Jet& y) { return sqrt(x * x + 2.0 * y * y + x * y) * exp(0.3 * x); };
  ScalarFunction f = [](std::span<const double> p) {
    return std::sqrt(p[0] * p[0] + 2 * p[1] * p[1] + p[0] * p[1]) * std::exp(0.3 * p[0]);
  };
  const std::array<double, 2> p{0.8, -0.4};
  Jet j = f_jet(seed_variable(1, p[0], 2, 4), seed_variable(2, p[1], 2, 4));
  auto layout = j.layout();
  for (std::size_t k = 1; k < layout->size(); ++k) {
    const auto& m = layout->index(k);
    const std::array<int, 2> alpha{m[0], m[1]};
    const int deg = layout->degree(k);
    const double h = deg <= 2 ? 1e-3 : 1e-2;
    const double exact = extract_derivative(j, alpha);
    const double fd = finite_difference_oracle(f, p, alpha, h);
    CHECK(std::abs(exact - fd) <= 1e-4 * std::max(1.0, std::abs(exact)));
  }
}
