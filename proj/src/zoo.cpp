#include "finsler/zoo.hpp"

#include <Eigen/Cholesky>

#include <sstream>

#include "finsler/rng.hpp"
#include "finsler/tensor.hpp"

namespace finsler {

namespace {

std::string var(char c, int i) { return std::string(1, c) + std::to_string(i); }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

std::string dot(char a, char b, int n) {
  std::vector<std::string> t;
  for (int i = 1; i <= n; ++i) t.push_back(var(a, i) + "*" + var(b, i));
  return join(t, " + ");
}

Expr parse_coefficient(const std::string& key, const std::string& text, int dim) {
  Expr e;
  try {
    e = Expr::parse(text, dim);
  } catch (const SyntaxError& err) {
    throw InvalidInput("params." + key + ": " + err.what());
  }
  if (e.depends_on_y()) throw InvalidInput("params." + key + ": coefficient must not reference y");
  return e;
}

double parse_constant(const std::string& key, const std::string& text, int dim) {
  const Expr e = parse_coefficient(key, text, dim);
  if (e.depends_on_x()) throw InvalidInput("params." + key + ": must be a constant");
  try {
    return detail::evaluate_constant(e.root(), {});
  } catch (const Error& err) {
    throw InvalidInput("params." + key + ": " + err.what());
  }
}

void reject_unknown(const TextParams& params, const std::vector<std::string>& allowed, const std::string& id) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw InvalidInput("params." + key + ": unknown parameter for metric '" + id + "'");
  }
}

std::string a_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return "a" + std::to_string(i) + std::to_string(j);
}

// Symmetric a_ij(x) from params a11, a12, ...; the default is diag(1, 4, 9, ...).
std::vector<std::string> coefficient_text(const TextParams& params, int n, bool squares_default) {
  std::vector<std::string> a(static_cast<std::size_t>(n * n));
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      auto it = params.find(a_key(i, j));
      std::string text;
      if (it != params.end()) {
        text = it->second;
      } else if (i == j) {
        text = squares_default ? std::to_string(i * i) : "1";
      } else {
        text = "0";
      }
      a[static_cast<std::size_t>((i - 1) * n + (j - 1))] = text;
    }
  }
  return a;
}

std::string quadratic_form(const std::vector<std::string>& a, int n) {
  std::vector<std::string> terms;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const std::string& c = a[static_cast<std::size_t>((i - 1) * n + (j - 1))];
      if (c == "0") continue;
      const std::string coef = i == j ? "(" + c + ")" : "2*(" + c + ")";
      terms.push_back(coef + "*" + var('y', i) + "*" + var('y', j));
    }
  }
  if (terms.empty()) throw InvalidInput("params: coefficient matrix a is identically zero");
  return join(terms, " + ");
}

std::vector<std::string> a_keys(int n) {
  std::vector<std::string> keys;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j <= n; ++j) keys.push_back(a_key(i, j));
  }
  return keys;
}

std::vector<Expr> parse_all(const std::vector<std::string>& texts, const std::vector<std::string>& keys, int n) {
  std::vector<Expr> out;
  for (std::size_t k = 0; k < texts.size(); ++k) out.push_back(parse_coefficient(keys[k], texts[k], n));
  return out;
}

std::vector<std::string> matrix_keys(int n) {
  std::vector<std::string> keys;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) keys.push_back("params." + a_key(i, j));
  }
  return keys;
}

Eigen::MatrixXd eval_matrix(const std::vector<Expr>& a, int n, const Eigen::VectorXd& x) {
  std::vector<double> xs(x.data(), x.data() + n), ys(static_cast<std::size_t>(n), 0.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = a[static_cast<std::size_t>(i * n + j)].evaluate<double>(xs, ys);
  }
  return m;
}

Eigen::VectorXd eval_vector(const std::vector<Expr>& b, int n, const Eigen::VectorXd& x) {
  std::vector<double> xs(x.data(), x.data() + n), ys(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = b[static_cast<std::size_t>(i)].evaluate<double>(xs, ys);
  return v;
}

double norm_of_b(const std::vector<Expr>& a, const std::vector<Expr>& b, int n, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd am = eval_matrix(a, n, x);
  require_positive_definite(am, "coefficient matrix a(x)");
  const Eigen::VectorXd bv = eval_vector(b, n, x);
  return std::sqrt(bv.dot(am.ldlt().solve(bv)));
}

// Probes a family-specific condition at x = 0 and at seeded points of the base ball.
void probe_base(const MetricModel& m) {
  Rng rng(0x13198a2e03707344ULL);
  m.check_base(Eigen::VectorXd::Zero(m.dim));
  for (int k = 0; k < 32; ++k) m.check_base(uniform_in_ball(rng, m.dim, m.base_radius));
}

}  // namespace

const std::vector<ZooEntry>& zoo_entries() {
  static const std::vector<ZooEntry> entries = {
      {"euclidean", "F = |y|", "2 <= n <= 4", {}, "none", "lebesgue, bh, auto (sigma = 1)"},
      {"riemannian",
       "F = sqrt(a_ij(x) y^i y^j)",
       "2 <= n <= 4",
       {{"aij", "diag(1, 4, 9, ...)", "entries a11, a12, ... (i <= j) as expressions in x; a must be positive definite"}},
       "a(x) positive definite at every sampled x",
       "lebesgue, bh, auto (sigma = sqrt det a), expr"},
      {"minkowski_quartic", "F = (sum_i y_i^4)^(1/4)", "2 <= n <= 4", {},
       "g degenerates on coordinate hyperplanes; sampled directions keep min |theta_i| >= 0.1",
       "lebesgue, bh, expr"},
      {"randers",
       "F = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i",
       "2 <= n <= 4",
       {{"aij", "delta", "entries of a as expressions in x"},
        {"bi", "eps*(x2, -x1, 0, ...)", "entries b1, b2, ... as expressions in x"},
        {"eps", "0.2", "scale of the default b"}},
       "|b(x)|_a = sqrt(b a^{-1} b) < 1 at every sampled x, else RandersConditionViolated",
       "lebesgue, bh, expr"},
      {"funk_ball",
       "F = [sqrt(<x,y>^2 + |y|^2 (1 - |x|^2)) + <x,y>] / (1 - |x|^2)",
       "2 <= n <= 4",
       {},
       "|x| < 1 (base points sampled with |x| <= 0.8)",
       "lebesgue, bh (sigma_BH = 1), expr"},
  };
  return entries;
}

std::string canonical_zoo_id(const std::string& id) {
  if (id == "funk") return "funk_ball";
  if (id == "quartic") return "minkowski_quartic";
  return id;
}

double randers_norm(const MetricModel& model, const Eigen::VectorXd& x) {
  if (model.one_form_b.empty()) throw InvalidInput("metric '" + model.id + "' has no one-form b");
  return norm_of_b(model.coefficient_a, model.one_form_b, model.dim, x);
}

MetricModel build_metric(const std::string& raw_id, int n, const TextParams& params, VolumeForm volume) {
  const std::string id = canonical_zoo_id(raw_id);
  if (n < 2) throw InvalidInput("dim must be at least 2");
  MetricModel m;
  m.id = id;
  m.dim = n;
  m.volume = std::move(volume);
  std::string text;

  if (id == "euclidean") {
    reject_unknown(params, {}, id);
    std::vector<std::string> t;
    for (int i = 1; i <= n; ++i) t.push_back(var('y', i) + "^2");
    text = "sqrt(" + join(t, " + ") + ")";
    m.coefficient_a = parse_all(coefficient_text({}, n, false), matrix_keys(n), n);
    m.riemannian = true;
  } else if (id == "riemannian") {
    reject_unknown(params, a_keys(n), id);
    const auto a = coefficient_text(params, n, true);
    text = "sqrt(" + quadratic_form(a, n) + ")";
    m.coefficient_a = parse_all(a, matrix_keys(n), n);
    m.riemannian = true;
    const auto coeffs = m.coefficient_a;
    m.base_check = [coeffs, n](const Eigen::VectorXd& x) {
      require_positive_definite(eval_matrix(coeffs, n, x), "coefficient matrix a(x)");
    };
    m.base_radius = 0.5;
  } else if (id == "minkowski_quartic") {
    reject_unknown(params, {}, id);
    std::vector<std::string> t;
    for (int i = 1; i <= n; ++i) t.push_back(var('y', i) + "^4");
    text = "(" + join(t, " + ") + ")^0.25";
    m.direction_margin = 0.1;
  } else if (id == "randers") {
    std::vector<std::string> allowed = a_keys(n);
    for (int i = 1; i <= n; ++i) allowed.push_back("b" + std::to_string(i));
    allowed.push_back("eps");
    reject_unknown(params, allowed, id);
    double eps = 0.2;
    if (auto it = params.find("eps"); it != params.end()) eps = parse_constant("eps", it->second, n);
    const auto a = coefficient_text(params, n, false);
    std::vector<std::string> b(static_cast<std::size_t>(n), "0");
    std::ostringstream e;
    e.precision(17);
    e << eps;
    b[0] = e.str() + "*x2";
    b[1] = "-" + e.str() + "*x1";
    for (int i = 1; i <= n; ++i) {
      if (auto it = params.find("b" + std::to_string(i)); it != params.end()) {
        b[static_cast<std::size_t>(i - 1)] = it->second;
      }
    }
    std::vector<std::string> lin;
    std::vector<std::string> bkeys;
    for (int i = 1; i <= n; ++i) {
      lin.push_back("(" + b[static_cast<std::size_t>(i - 1)] + ")*" + var('y', i));
      bkeys.push_back("params.b" + std::to_string(i));
    }
    text = "sqrt(" + quadratic_form(a, n) + ") + " + join(lin, " + ");
    m.coefficient_a = parse_all(a, matrix_keys(n), n);
    m.one_form_b = parse_all(b, bkeys, n);
    m.base_radius = 2.0;
    const auto ac = m.coefficient_a;
    const auto bc = m.one_form_b;
    m.base_check = [ac, bc, n](const Eigen::VectorXd& x) {
      const double norm = norm_of_b(ac, bc, n, x);
      if (!(norm < 1.0)) throw RandersConditionViolated(std::vector<double>(x.data(), x.data() + n), norm);
    };
  } else if (id == "funk_ball") {
    reject_unknown(params, {}, id);
    std::vector<std::string> t;
    for (int i = 1; i <= n; ++i) t.push_back(var('x', i) + "^2");
    std::vector<std::string> yy;
    for (int i = 1; i <= n; ++i) yy.push_back(var('y', i) + "^2");
    const std::string xy = "(" + dot('x', 'y', n) + ")";
    const std::string one_minus = "(1 - (" + join(t, " + ") + "))";
    text = "(sqrt(" + xy + "^2 + (" + join(yy, " + ") + ")*" + one_minus + ") + " + xy + ")/" + one_minus;
    m.base_radius = 0.8;
    m.base_check = [](const Eigen::VectorXd& x) {
      if (!(x.norm() < 1.0)) throw InvalidInput("funk_ball needs |x| < 1, got |x| = " + std::to_string(x.norm()));
    };
  } else {
    throw InvalidInput("metric: unknown zoo id '" + raw_id + "'");
  }

  try {
    m.F = Expr::parse(text, n);
  } catch (const SyntaxError& err) {
    throw InvalidInput(std::string("params: generated metric text does not parse: ") + err.what());
  }
  // The family condition first: it names the failing x, which the generic checks cannot.
  probe_base(m);
  return finalize_model(std::move(m));
}

MetricModel metric_from_expression(const std::string& text, int dim, const TextParams& params, VolumeForm volume) {
  if (dim < 2) throw InvalidInput("dim must be at least 2");
  MetricModel m;
  m.id = "expr";
  m.dim = dim;
  m.volume = std::move(volume);
  std::set<std::string, std::less<>> names;
  for (const auto& [key, value] : params) {
    m.params[key] = parse_constant(key, value, dim);
    names.insert(key);
  }
  try {
    m.F = Expr::parse(text, dim, names);
  } catch (const SyntaxError& err) {
    throw InvalidInput(std::string("metric-expr: ") + err.what());
  }
  return finalize_model(std::move(m));
}

}  // namespace finsler
