#include "finsler/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "finsler/rng.hpp"

namespace finsler {

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  Tok kind;
  std::size_t pos;  // 0-based
  std::string_view text;
  double number{0.0};
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::number: return "number";
    case Tok::ident: return "identifier";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::star: return "'*'";
    case Tok::slash: return "'/'";
    case Tok::caret: return "'^'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::end: return "end of input";
  }
  return "?";
}

NodePtr make_node(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

bool references_variables(const ExprNode& n) {
  if (n.kind == NodeKind::x_var || n.kind == NodeKind::y_var) return true;
  if (n.lhs && references_variables(*n.lhs)) return true;
  if (n.rhs && references_variables(*n.rhs)) return true;
  return false;
}

bool is_literal_zero(const ExprNode& n) {
  if (n.kind == NodeKind::literal) return n.value == 0.0;
  if (n.kind == NodeKind::neg) return is_literal_zero(*n.lhs);
  return false;
}

class Parser {
 public:
  Parser(std::string_view text, int dim, const std::set<std::string, std::less<>>& params)
      : text_(text), dim_(dim), params_(params) {
    advance();
  }

  NodePtr parse() {
    if (current_.kind == Tok::end) fail("expression");
    NodePtr root = expression();
    if (current_.kind != Tok::end) fail("operator or end of input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(current_.pos + 1, expected, "unexpected " + describe(current_.kind));
  }

  void advance() {
    std::size_t i = pos_;
    while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
    if (i >= text_.size()) {
      current_ = {Tok::end, text_.size(), {}};
      pos_ = i;
      return;
    }
    const char c = text_[i];
    auto single = [&](Tok t) {
      current_ = {t, i, text_.substr(i, 1)};
      pos_ = i + 1;
    };
    switch (c) {
      case '+': return single(Tok::plus);
      case '-': return single(Tok::minus);
      case '*': return single(Tok::star);
      case '/': return single(Tok::slash);
      case '^': return single(Tok::caret);
      case '(': return single(Tok::lparen);
      case ')': return single(Tok::rparen);
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
      if (j < text_.size() && text_[j] == '.') {
        ++j;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
      }
      if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
        if (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) {
          while (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) ++k;
          j = k;
        }
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text_.data() + i, text_.data() + j, v);
      if (ec != std::errc() || ptr != text_.data() + j) {
        throw SyntaxError(i + 1, "number", "malformed number literal");
      }
      current_ = {Tok::number, i, text_.substr(i, j - i), v};
      pos_ = j;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) ++j;
      current_ = {Tok::ident, i, text_.substr(i, j - i)};
      pos_ = j;
      return;
    }
    throw SyntaxError(i + 1, "expression", std::string("unexpected character '") + c + "'");
  }

  NodePtr expression() {
    NodePtr lhs = term();
    while (current_.kind == Tok::plus || current_.kind == Tok::minus) {
      const NodeKind kind = current_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
      advance();
      lhs = make_node(kind, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (current_.kind == Tok::star || current_.kind == Tok::slash) {
      const NodeKind kind = current_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
      const std::size_t op_pos = current_.pos;
      advance();
      NodePtr rhs = unary();
      if (kind == NodeKind::div && is_literal_zero(*rhs)) {
        throw SyntaxError(op_pos + 1, "nonzero divisor", "division by literal zero");
      }
      lhs = make_node(kind, lhs, rhs);
    }
    return lhs;
  }

  NodePtr unary() {
    if (current_.kind == Tok::minus) {
      advance();
      return make_node(NodeKind::neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (current_.kind == Tok::caret) {
      advance();
      const std::size_t exp_pos = current_.pos;
      NodePtr e = exponent();
      if (references_variables(*e)) {
        throw SyntaxError(exp_pos + 1, "constant exponent", "exponent references a variable");
      }
      return make_node(NodeKind::pow, base, e);
    }
    return base;
  }

  NodePtr exponent() {
    if (current_.kind == Tok::minus) {
      advance();
      return make_node(NodeKind::neg, exponent());
    }
    return power();
  }

  NodePtr atom() {
    switch (current_.kind) {
      case Tok::number: {
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::literal;
        n->value = current_.number;
        advance();
        return n;
      }
      case Tok::lparen: {
        advance();
        NodePtr inner = expression();
        if (current_.kind != Tok::rparen) fail("')'");
        advance();
        return inner;
      }
      case Tok::ident:
        return identifier();
      default:
        fail("number, identifier or '('");
    }
  }

  NodePtr identifier() {
    const Token tok = current_;
    const std::string_view name = tok.text;
    if (name == "sqrt" || name == "exp" || name == "ln") {
      advance();
      if (current_.kind != Tok::lparen) fail("'(' after " + std::string(name));
      advance();
      NodePtr arg = expression();
      if (current_.kind != Tok::rparen) fail("')'");
      advance();
      const NodeKind kind = name == "sqrt" ? NodeKind::sqrt : (name == "exp" ? NodeKind::exp : NodeKind::ln);
      return make_node(kind, arg);
    }
    if ((name[0] == 'x' || name[0] == 'y') && name.size() > 1 &&
        name.substr(1).find_first_not_of("0123456789") == std::string_view::npos) {
      int index = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (index < 1 || index > dim_) {
        throw SyntaxError(tok.pos + 1, "variable index in [1, " + std::to_string(dim_) + "]",
                          "variable " + std::string(name) + " out of range");
      }
      auto n = std::make_shared<ExprNode>();
      n->kind = name[0] == 'x' ? NodeKind::x_var : NodeKind::y_var;
      n->index = index;
      advance();
      return n;
    }
    if (params_.find(name) != params_.end()) {
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::parameter;
      n->name = std::string(name);
      advance();
      return n;
    }
    throw SyntaxError(tok.pos + 1, "x<i>, y<i>, a parameter or a function",
                      "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  int dim_;
  const std::set<std::string, std::less<>>& params_;
  std::size_t pos_{0};
  Token current_{Tok::end, 0, {}};
};

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::neg: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write(const ExprNode& n, bool full, std::string& out);

void write_child(const ExprNode& child, int min_prec, bool full, std::string& out) {
  const bool wrap = !full && precedence(child.kind) < min_prec;
  if (wrap) out += '(';
  write(child, full, out);
  if (wrap) out += ')';
}

void write(const ExprNode& n, bool full, std::string& out) {
  const char* fn = nullptr;
  switch (n.kind) {
    case NodeKind::literal: out += format_number(n.value); return;
    case NodeKind::x_var: out += "x" + std::to_string(n.index); return;
    case NodeKind::y_var: out += "y" + std::to_string(n.index); return;
    case NodeKind::parameter: out += n.name; return;
    case NodeKind::sqrt: fn = "sqrt"; break;
    case NodeKind::exp: fn = "exp"; break;
    case NodeKind::ln: fn = "ln"; break;
    default: break;
  }
  if (fn) {
    out += fn;
    out += '(';
    write(*n.lhs, full, out);
    out += ')';
    return;
  }
  if (full) out += '(';
  switch (n.kind) {
    case NodeKind::add:
    case NodeKind::sub:
      write_child(*n.lhs, 1, full, out);
      out += n.kind == NodeKind::add ? " + " : " - ";
      write_child(*n.rhs, 2, full, out);
      break;
    case NodeKind::mul:
    case NodeKind::div:
      write_child(*n.lhs, 2, full, out);
      out += n.kind == NodeKind::mul ? "*" : "/";
      write_child(*n.rhs, 3, full, out);
      break;
    case NodeKind::neg:
      out += '-';
      write_child(*n.lhs, 3, full, out);
      break;
    case NodeKind::pow:
      write_child(*n.lhs, 5, full, out);
      out += '^';
      write_child(*n.rhs, 3, full, out);
      break;
    default:
      break;
  }
  if (full) out += ')';
}

bool any_node(const ExprNode& n, NodeKind kind) {
  if (n.kind == kind) return true;
  return (n.lhs && any_node(*n.lhs, kind)) || (n.rhs && any_node(*n.rhs, kind));
}

void collect_parameters(const ExprNode& n, std::set<std::string>& out) {
  if (n.kind == NodeKind::parameter) out.insert(n.name);
  if (n.lhs) collect_parameters(*n.lhs, out);
  if (n.rhs) collect_parameters(*n.rhs, out);
}

}  // namespace

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::literal: return a.value == b.value;
    case NodeKind::x_var:
    case NodeKind::y_var: return a.index == b.index;
    case NodeKind::parameter: return a.name == b.name;
    default: break;
  }
  if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) {
    return false;
  }
  return (!a.lhs || structurally_equal(*a.lhs, *b.lhs)) && (!a.rhs || structurally_equal(*a.rhs, *b.rhs));
}

Expr Expr::parse(std::string_view text, int dim, const std::set<std::string, std::less<>>& params) {
  if (dim < 1) throw InvalidInput("expression dimension must be positive");
  Parser parser(text, dim, params);
  return Expr(parser.parse(), dim);
}

std::string to_string(const ExprNode& node, bool full_parens) {
  std::string out;
  write(node, full_parens, out);
  return out;
}

std::string Expr::str(bool full_parens) const { return root_ ? to_string(*root_, full_parens) : std::string{}; }

bool Expr::depends_on_x() const { return root_ && any_node(*root_, NodeKind::x_var); }
bool Expr::depends_on_y() const { return root_ && any_node(*root_, NodeKind::y_var); }

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  if (root_) collect_parameters(*root_, out);
  return out;
}

namespace detail {

double evaluate_constant(const ExprNode& node, const ParamMap& params) {
  if (node.kind == NodeKind::parameter) {
    auto it = params.find(node.name);
    if (it == params.end()) throw InvalidInput("parameter '" + node.name + "' is not bound");
    return it->second;
  }
  static const std::vector<double> none;
  return Evaluator<double>{none, none, params}(node);
}

}  // namespace detail

HomogeneityReport check_positive_homogeneity(const Expr& f, int dim, int trials, std::uint64_t seed,
                                             const ParamMap& params, double x_radius) {
  if (trials < 1) throw InvalidInput("homogeneity check needs at least one trial");
  Rng rng(seed);
  HomogeneityReport report;
  report.trials = trials;
  report.min_value = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = uniform_in_ball(rng, dim, x_radius);
    const Eigen::VectorXd y = uniform_on_sphere(rng, dim) * rng.uniform(0.5, 2.0);
    const double lambda = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const Eigen::VectorXd ly = lambda * y;
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(dim));
    const double base = f.evaluate<double>(xs, std::span<const double>(y.data(), static_cast<std::size_t>(dim)),
                                           params);
    const double scaled = f.evaluate<double>(xs, std::span<const double>(ly.data(), static_cast<std::size_t>(dim)),
                                             params);
    report.min_value = std::min({report.min_value, base, scaled});
    const double denom = std::abs(lambda * base);
    const double dev = denom > 0.0 ? std::abs(scaled - lambda * base) / denom
                                   : std::numeric_limits<double>::infinity();
    if (dev > report.max_relative_deviation || t == 0) {
      report.max_relative_deviation = std::max(report.max_relative_deviation, dev);
      report.worst_x.assign(x.data(), x.data() + dim);
      report.worst_y.assign(y.data(), y.data() + dim);
      report.worst_lambda = lambda;
    }
  }
  return report;
}

}  // namespace finsler
