#pragma once

// A small infix language for Finsler functions F(x, y) and volume
// coefficients sigma(x).
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := atom ('^' exponent)?
//   exponent := '-' exponent | power          (right associative)
//   atom     := number | x<i> | y<i> | name | fn '(' expr ')' | '(' expr ')'
//   fn       := sqrt | exp | ln
//
// The exponent of '^' must not reference x or y. Error offsets are 1-based
// byte positions in the source text.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

using ParamMap = std::map<std::string, double, std::less<>>;

enum class NodeKind { literal, x_var, y_var, parameter, add, sub, mul, div, pow, neg, sqrt, exp, ln };

struct ExprNode {
  NodeKind kind{NodeKind::literal};
  double value{0.0};  // literal
  int index{0};       // x_var / y_var, 1-based
  std::string name;   // parameter
  std::shared_ptr<const ExprNode> lhs;  // operand of unary nodes
  std::shared_ptr<const ExprNode> rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

bool structurally_equal(const ExprNode& a, const ExprNode& b);

class Expr {
 public:
  Expr() = default;
  Expr(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  static Expr parse(std::string_view text, int dim, const std::set<std::string, std::less<>>& params = {});

  const ExprNode& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  int dim() const { return dim_; }
  bool empty() const { return !root_; }

  /// Minimal parenthesization by default; `full_parens` wraps every operator node.
  std::string str(bool full_parens = false) const;

  bool depends_on_x() const;
  bool depends_on_y() const;
  std::set<std::string> parameters() const;

  template <class Scalar>
  Scalar evaluate(std::span<const Scalar> x, std::span<const Scalar> y, const ParamMap& params = {}) const;

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.dim_ == b.dim_ && structurally_equal(*a.root_, *b.root_);
  }

 private:
  NodePtr root_;
  int dim_{0};
};

std::string to_string(const ExprNode& node, bool full_parens = false);

struct HomogeneityReport {
  double max_relative_deviation{0.0};
  double min_value{0.0};  // smallest F(x, y) seen
  std::vector<double> worst_x, worst_y;
  double worst_lambda{1.0};
  int trials{0};

  bool homogeneous(double tolerance) const { return max_relative_deviation <= tolerance && min_value > 0.0; }
};

/// Samples x in the ball of radius `x_radius`, y on the unit sphere and
/// lambda in [0.1, 10]; reports max |F(x, ly) - l F(x, y)| / (l F(x, y)).
HomogeneityReport check_positive_homogeneity(const Expr& f, int dim, int trials, std::uint64_t seed,
                                             const ParamMap& params = {}, double x_radius = 0.5);

namespace detail {

template <class Scalar>
Scalar integer_power(const Scalar& base, long exponent) {
  if (exponent < 0) return Scalar(1.0) / integer_power(base, -exponent);
  Scalar result(1.0);
  Scalar b = base;
  while (exponent > 0) {
    if (exponent & 1) result = result * b;
    exponent >>= 1;
    if (exponent > 0) b = b * b;
  }
  return result;
}

double evaluate_constant(const ExprNode& node, const ParamMap& params);

template <class Scalar>
struct Evaluator {
  std::span<const Scalar> x;
  std::span<const Scalar> y;
  const ParamMap& params;

  Scalar operator()(const ExprNode& n) const {
    using std::exp;
    using std::log;
    using std::pow;
    using std::sqrt;
    switch (n.kind) {
      case NodeKind::literal:
        return Scalar(n.value);
      case NodeKind::x_var:
        return x[static_cast<std::size_t>(n.index - 1)];
      case NodeKind::y_var:
        return y[static_cast<std::size_t>(n.index - 1)];
      case NodeKind::parameter:
        return Scalar(evaluate_constant(n, params));
      case NodeKind::add:
        return (*this)(*n.lhs) + (*this)(*n.rhs);
      case NodeKind::sub:
        return (*this)(*n.lhs) - (*this)(*n.rhs);
      case NodeKind::mul:
        return (*this)(*n.lhs) * (*this)(*n.rhs);
      case NodeKind::div: {
        Scalar d = (*this)(*n.rhs);
        if (value_of(d) == 0.0) throw DomainError("division", 0.0, to_string(n));
        return (*this)(*n.lhs) / d;
      }
      case NodeKind::neg:
        return -(*this)(*n.lhs);
      case NodeKind::pow: {
        const double e = evaluate_constant(*n.rhs, params);
        Scalar b = (*this)(*n.lhs);
        if (std::floor(e) == e && std::abs(e) <= 64.0) {
          if (e < 0 && value_of(b) == 0.0) throw DomainError("pow", 0.0, to_string(n));
          return integer_power(b, static_cast<long>(e));
        }
        if (!(value_of(b) > 0.0)) throw DomainError("pow", value_of(b), to_string(n));
        return pow(b, e);
      }
      case NodeKind::sqrt: {
        Scalar a = (*this)(*n.lhs);
        if (!(value_of(a) > 0.0)) throw DomainError("sqrt", value_of(a), to_string(n));
        return sqrt(a);
      }
      case NodeKind::exp:
        return exp((*this)(*n.lhs));
      case NodeKind::ln: {
        Scalar a = (*this)(*n.lhs);
        if (!(value_of(a) > 0.0)) throw DomainError("ln", value_of(a), to_string(n));
        return log(a);
      }
    }
    throw Error("corrupt expression node");
  }
};

}  // namespace detail

template <class Scalar>
Scalar Expr::evaluate(std::span<const Scalar> x, std::span<const Scalar> y, const ParamMap& params) const {
  if (static_cast<int>(x.size()) < dim_ || static_cast<int>(y.size()) < dim_) {
    throw InvalidInput("evaluation vectors shorter than the expression dimension");
  }
  return detail::Evaluator<Scalar>{x, y, params}(*root_);
}

}  // namespace finsler
