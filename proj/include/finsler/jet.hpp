#pragma once

// Dense truncated multivariate Taylor arithmetic.
//
// A Jet stores the Taylor coefficients f_a = d^a f / a! of a scalar function
// at an expansion point, for every multi-index |a| <= order, in graded
// lexicographic order. Because the layout is graded, the layout of order k-1
// is a prefix of the layout of order k; truncation and differentiation rely
// on that.
//
// A default-constructed Jet (or one built from a double) is a constant with no
// layout. Constants combine with any jet; two non-constant jets must share the
// same (n_vars, order) layout.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace finsler {

inline constexpr int kMaxJetVars = 8;
inline constexpr int kMaxJetOrder = 8;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

class JetLayout {
 public:
  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  struct Lowering {
    std::uint32_t src, dst;
    double factor;
  };

  /// Shared, cached layout. Thread safe.
  static std::shared_ptr<const JetLayout> get(int n_vars, int order);

  int n_vars() const { return n_vars_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }

  const MultiIndex& index(std::size_t k) const { return indices_[k]; }
  int degree(std::size_t k) const { return degrees_[k]; }
  /// Number of multi-indices with total degree <= d.
  std::size_t prefix_size(int d) const;
  /// Position of a multi-index; throws InvalidInput when |a| > order.
  std::size_t position(const MultiIndex& alpha) const;

  /// All (i, j, k) with index(i) + index(j) = index(k), sorted by k.
  std::span<const Product> products() const { return products_; }
  /// For variable v: every a with a_v >= 1 maps to a - e_v with factor a_v.
  std::span<const Lowering> lowering(int v) const { return lowerings_[static_cast<std::size_t>(v)]; }

  JetLayout(int n_vars, int order);

 private:
  std::uint64_t key(const MultiIndex& alpha) const;

  int n_vars_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::vector<std::size_t> prefix_;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> lookup_;  // sorted by key
  std::vector<Product> products_;
  std::vector<std::vector<Lowering>> lowerings_;
};

using JetLayoutPtr = std::shared_ptr<const JetLayout>;

class Jet {
 public:
  Jet() : coeffs_(Eigen::VectorXd::Zero(1)) {}
  Jet(double value) : coeffs_(Eigen::VectorXd::Constant(1, value)) {}  // NOLINT: implicit by design of scalar code
  /// Zero jet with the given layout.
  explicit Jet(JetLayoutPtr layout);
  Jet(JetLayoutPtr layout, Eigen::VectorXd coeffs);

  /// Jet of the coordinate function x_i (1-based) expanded at `value`.
  static Jet variable(int i, double value, int n_vars, int order);
  static Jet variable(int i, double value, const JetLayoutPtr& layout);

  bool is_constant() const { return !layout_; }
  const JetLayoutPtr& layout() const { return layout_; }
  int n_vars() const;
  int order() const;

  double value() const { return coeffs_[0]; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }
  /// Taylor coefficient f_a (not the derivative).
  double coeff(const MultiIndex& alpha) const;
  /// a! f_a, the partial derivative d^a f at the expansion point.
  double derivative(std::span<const int> alpha) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a) {
    a.coeffs_ = -a.coeffs_;
    return a;
  }

 private:
  JetLayoutPtr layout_;
  Eigen::VectorXd coeffs_;
};

/// Jet of the coordinate function x_i (1-based): order-0 coefficient `value`,
/// coefficient 1 on e_i. Throws InvalidInput when i is out of range.
Jet seed_variable(int i, double value, int n_vars, int order);

/// d^a f at the expansion point; throws InvalidInput when |a| > order.
double extract_derivative(const Jet& j, std::span<const int> alpha);

Jet sqrt(const Jet& j);
Jet exp(const Jet& j);
Jet log(const Jet& j);
/// Real power; requires a positive order-0 coefficient unless `exponent` is integral.
Jet pow(const Jet& j, double exponent);
Jet reciprocal(const Jet& j);

/// Sum of d_k (j - j0)^k for k <= order, Horner scheme. `series` holds d_0, d_1, ...
Jet compose_series(const Jet& j, std::span<const double> series);

/// Partial derivative along variable v (0-based); the result has order-1.
Jet differentiate(const Jet& j, int v);
/// Drops every coefficient above `order`.
Jet truncate(const Jet& j, int order);
/// Keeps the variables listed in `keep` (0-based, in that order) and sets all
/// others to zero.
Jet restrict_variables(const Jet& j, std::span<const int> keep);

inline double value_of(double x) { return x; }
inline double value_of(const Jet& j) { return j.value(); }

/// Substitutes inner jets (all with zero order-0 part, sharing one layout) for
/// the variables of an outer jet. The monomials of the inner jets are built once
/// and reused across calls.
class JetComposer {
 public:
  explicit JetComposer(std::vector<Jet> inner);

  /// outer must have n_vars == inner.size(). The result has the inner layout
  /// truncated to min(outer.order(), inner order).
  Jet operator()(const Jet& outer) const;

  const JetLayoutPtr& inner_layout() const { return layout_; }

 private:
  std::vector<Jet> inner_;
  JetLayoutPtr layout_;
  JetLayoutPtr outer_layout_;  // layout of monomials (n_outer, inner order)
  std::vector<Jet> monomials_;
};

}  // namespace finsler

namespace Eigen {

template <>
struct NumTraits<finsler::Jet> : GenericNumTraits<double> {
  using Real = finsler::Jet;
  using NonInteger = finsler::Jet;
  using Nested = finsler::Jet;
  using Literal = finsler::Jet;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 64,
    MulCost = 512
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

}  // namespace Eigen

namespace finsler {

using JetMatrix = Eigen::Matrix<Jet, Eigen::Dynamic, Eigen::Dynamic>;
using JetVector = Eigen::Matrix<Jet, Eigen::Dynamic, 1>;

}  // namespace finsler
