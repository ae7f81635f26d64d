#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "finsler/errors.hpp"

namespace finsler {

namespace {

void enumerate_degree(int n_vars, int var, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
  if (var == n_vars - 1) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(remaining);
    out.push_back(current);
    current[static_cast<std::size_t>(var)] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(e);
    enumerate_degree(n_vars, var + 1, remaining - e, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

int total_degree(const MultiIndex& a) {
  int d = 0;
  for (auto e : a) d += e;
  return d;
}

const JetLayout& same_layout(const Jet& a, const Jet& b) {
  if (a.layout() != b.layout() &&
      (a.layout()->n_vars() != b.layout()->n_vars() || a.layout()->order() != b.layout()->order())) {
    throw InvalidInput("jet arithmetic mixes layouts (" + std::to_string(a.n_vars()) + " vars, order " +
                       std::to_string(a.order()) + ") and (" + std::to_string(b.n_vars()) + " vars, order " +
                       std::to_string(b.order()) + ")");
  }
  return *a.layout();
}

Eigen::VectorXd cauchy_product(const JetLayout& layout, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (const auto& p : layout.products()) po[p.out] += pa[p.lhs] * pb[p.rhs];
  return out;
}

}  // namespace

JetLayout::JetLayout(int n_vars, int order) : n_vars_(n_vars), order_(order) {
  if (n_vars < 1 || n_vars > kMaxJetVars) {
    throw InvalidInput("jet variable count " + std::to_string(n_vars) + " outside [1, " +
                       std::to_string(kMaxJetVars) + "]");
  }
  if (order < 0 || order > kMaxJetOrder) {
    throw InvalidInput("jet order " + std::to_string(order) + " outside [0, " + std::to_string(kMaxJetOrder) + "]");
  }
  MultiIndex current{};
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(n_vars, 0, d, current, indices_);
    prefix_.push_back(indices_.size());
  }
  degrees_.reserve(indices_.size());
  lookup_.reserve(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    degrees_.push_back(total_degree(indices_[k]));
    lookup_.emplace_back(key(indices_[k]), static_cast<std::uint32_t>(k));
  }
  std::sort(lookup_.begin(), lookup_.end());

  for (std::size_t i = 0; i < indices_.size(); ++i) {
    const std::size_t limit = prefix_size(order - degrees_[i]);
    for (std::size_t j = 0; j < limit; ++j) {
      MultiIndex sum{};
      for (int v = 0; v < n_vars; ++v) {
        sum[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(indices_[i][static_cast<std::size_t>(v)] +
                                                                     indices_[j][static_cast<std::size_t>(v)]);
      }
      products_.push_back(
          {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(position(sum))});
    }
  }
  std::sort(products_.begin(), products_.end(), [](const Product& a, const Product& b) {
    return a.out != b.out ? a.out < b.out : (a.lhs != b.lhs ? a.lhs < b.lhs : a.rhs < b.rhs);
  });

  lowerings_.resize(static_cast<std::size_t>(n_vars));
  for (int v = 0; v < n_vars; ++v) {
    const auto sv = static_cast<std::size_t>(v);
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (indices_[k][sv] == 0) continue;
      MultiIndex lower = indices_[k];
      lower[sv] = static_cast<std::uint8_t>(lower[sv] - 1);
      lowerings_[sv].push_back(
          {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(position(lower)), double(indices_[k][sv])});
    }
  }
}

std::shared_ptr<const JetLayout> JetLayout::get(int n_vars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({n_vars, order});
    if (it != cache.end()) return it->second;
  }
  auto layout = std::make_shared<const JetLayout>(n_vars, order);
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(std::pair{n_vars, order}, layout);
  return it->second;
}

std::size_t JetLayout::prefix_size(int d) const {
  if (d < 0) return 0;
  if (d >= order_) return indices_.size();
  return prefix_[static_cast<std::size_t>(d)];
}

std::uint64_t JetLayout::key(const MultiIndex& alpha) const {
  std::uint64_t k = 0;
  for (int v = 0; v < n_vars_; ++v) k = k * 16 + alpha[static_cast<std::size_t>(v)];
  return k;
}

std::size_t JetLayout::position(const MultiIndex& alpha) const {
  if (total_degree(alpha) > order_) {
    throw InvalidInput("multi-index of degree " + std::to_string(total_degree(alpha)) + " exceeds jet order " +
                       std::to_string(order_));
  }
  for (int v = n_vars_; v < kMaxJetVars; ++v) {
    if (alpha[static_cast<std::size_t>(v)] != 0) throw InvalidInput("multi-index references a missing variable");
  }
  const auto k = key(alpha);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::pair<std::uint64_t, std::uint32_t>{k, 0});
  return it->second;
}

Jet::Jet(JetLayoutPtr layout)
    : layout_(std::move(layout)), coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_->size()))) {}

Jet::Jet(JetLayoutPtr layout, Eigen::VectorXd coeffs) : layout_(std::move(layout)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != layout_->size()) {
    throw InvalidInput("coefficient count does not match jet layout");
  }
}

Jet Jet::variable(int i, double value, const JetLayoutPtr& layout) {
  if (i < 1 || i > layout->n_vars()) {
    throw InvalidInput("jet variable index " + std::to_string(i) + " outside [1, " +
                       std::to_string(layout->n_vars()) + "]");
  }
  Jet j(layout);
  j.coeffs_[0] = value;
  if (layout->order() >= 1) {
    MultiIndex e{};
    e[static_cast<std::size_t>(i - 1)] = 1;
    j.coeffs_[static_cast<Eigen::Index>(layout->position(e))] = 1.0;
  }
  return j;
}

Jet Jet::variable(int i, double value, int n_vars, int order) {
  if (i < 1 || i > n_vars) {
    throw InvalidInput("jet variable index " + std::to_string(i) + " outside [1, " + std::to_string(n_vars) + "]");
  }
  return variable(i, value, JetLayout::get(n_vars, order));
}

Jet seed_variable(int i, double value, int n_vars, int order) { return Jet::variable(i, value, n_vars, order); }

int Jet::n_vars() const { return layout_ ? layout_->n_vars() : 0; }
int Jet::order() const { return layout_ ? layout_->order() : 0; }

double Jet::coeff(const MultiIndex& alpha) const {
  if (!layout_) return total_degree(alpha) == 0 ? coeffs_[0] : 0.0;
  return coeffs_[static_cast<Eigen::Index>(layout_->position(alpha))];
}

double Jet::derivative(std::span<const int> alpha) const {
  MultiIndex a{};
  if (layout_ && static_cast<int>(alpha.size()) != layout_->n_vars()) {
    throw InvalidInput("multi-index length does not match the jet variable count");
  }
  double factorial = 1.0;
  for (std::size_t v = 0; v < alpha.size(); ++v) {
    if (alpha[v] < 0 || alpha[v] > kMaxJetOrder) throw InvalidInput("invalid multi-index entry");
    a[v] = static_cast<std::uint8_t>(alpha[v]);
    for (int k = 2; k <= alpha[v]; ++k) factorial *= k;
  }
  return factorial * coeff(a);
}

double extract_derivative(const Jet& j, std::span<const int> alpha) { return j.derivative(alpha); }

Jet& Jet::operator+=(const Jet& o) {
  if (o.is_constant()) {
    coeffs_[0] += o.coeffs_[0];
  } else if (is_constant()) {
    const double c = coeffs_[0];
    *this = o;
    coeffs_[0] += c;
  } else {
    same_layout(*this, o);
    coeffs_ += o.coeffs_;
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.is_constant()) {
    coeffs_[0] -= o.coeffs_[0];
  } else if (is_constant()) {
    const double c = coeffs_[0];
    *this = -o;
    coeffs_[0] += c;
  } else {
    same_layout(*this, o);
    coeffs_ -= o.coeffs_;
  }
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_constant()) {
    Jet r = b;
    r.coeffs_ *= a.coeffs_[0];
    return r;
  }
  if (b.is_constant()) {
    Jet r = a;
    r.coeffs_ *= b.coeffs_[0];
    return r;
  }
  const JetLayout& layout = same_layout(a, b);
  return Jet(a.layout_, cauchy_product(layout, a.coeffs_, b.coeffs_));
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    if (b.value() == 0.0) throw DomainError("division", 0.0);
    Jet r = a;
    r.coeffs_ /= b.value();
    return r;
  }
  return a * reciprocal(b);
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet compose_series(const Jet& j, std::span<const double> series) {
  if (j.is_constant()) return Jet(series.empty() ? 0.0 : series[0]);
  const int order = std::min<int>(j.order(), static_cast<int>(series.size()) - 1);
  if (order < 0) return Jet(j.layout());
  Jet h = j;
  h.coeffs()[0] = 0.0;
  Jet r(series[static_cast<std::size_t>(order)]);
  for (int k = order - 1; k >= 0; --k) {
    r = r * h;
    r += Jet(series[static_cast<std::size_t>(k)]);
  }
  if (r.is_constant()) {
    Jet full(j.layout());
    full.coeffs()[0] = r.value();
    return full;
  }
  return r;
}

namespace {

// Series of (f0 + h)^p about f0 up to `order` terms.
std::vector<double> power_series(double f0, double p, int order) {
  std::vector<double> d(static_cast<std::size_t>(order) + 1);
  d[0] = std::pow(f0, p);
  for (int k = 1; k <= order; ++k) {
    d[static_cast<std::size_t>(k)] = d[static_cast<std::size_t>(k) - 1] * (p - k + 1) / (k * f0);
  }
  return d;
}

bool is_integral(double e) { return std::isfinite(e) && std::floor(e) == e && std::abs(e) <= 64.0; }

Jet integer_power(const Jet& base, long exponent) {
  if (exponent < 0) return integer_power(reciprocal(base), -exponent);
  Jet result(1.0);
  Jet b = base;
  while (exponent > 0) {
    if (exponent & 1) result = result * b;
    exponent >>= 1;
    if (exponent > 0) b = b * b;
  }
  if (result.is_constant() && !base.is_constant()) {
    Jet full(base.layout());
    full.coeffs()[0] = result.value();
    return full;
  }
  return result;
}

}  // namespace

Jet reciprocal(const Jet& j) {
  const double f0 = j.value();
  if (f0 == 0.0) throw DomainError("reciprocal", f0);
  if (j.is_constant()) return Jet(1.0 / f0);
  return compose_series(j, power_series(f0, -1.0, j.order()));
}

Jet sqrt(const Jet& j) {
  const double f0 = j.value();
  if (!(f0 > 0.0)) throw DomainError("sqrt", f0);
  if (j.is_constant()) return Jet(std::sqrt(f0));
  return compose_series(j, power_series(f0, 0.5, j.order()));
}

Jet exp(const Jet& j) {
  const double f0 = j.value();
  if (j.is_constant()) return Jet(std::exp(f0));
  std::vector<double> d(static_cast<std::size_t>(j.order()) + 1);
  d[0] = std::exp(f0);
  for (std::size_t k = 1; k < d.size(); ++k) d[k] = d[k - 1] / static_cast<double>(k);
  return compose_series(j, d);
}

Jet log(const Jet& j) {
  const double f0 = j.value();
  if (!(f0 > 0.0)) throw DomainError("ln", f0);
  if (j.is_constant()) return Jet(std::log(f0));
  std::vector<double> d(static_cast<std::size_t>(j.order()) + 1);
  d[0] = std::log(f0);
  double inv_power = 1.0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    inv_power /= f0;
    d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * inv_power / static_cast<double>(k);
  }
  return compose_series(j, d);
}

Jet pow(const Jet& j, double exponent) {
  if (is_integral(exponent)) return integer_power(j, static_cast<long>(exponent));
  const double f0 = j.value();
  if (!(f0 > 0.0)) throw DomainError("pow", f0);
  if (j.is_constant()) return Jet(std::pow(f0, exponent));
  return compose_series(j, power_series(f0, exponent, j.order()));
}

Jet differentiate(const Jet& j, int v) {
  if (j.is_constant()) return Jet(0.0);
  if (v < 0 || v >= j.n_vars()) throw InvalidInput("differentiation variable out of range");
  if (j.order() == 0) throw InvalidInput("cannot differentiate an order-0 jet");
  auto out_layout = JetLayout::get(j.n_vars(), j.order() - 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_layout->size()));
  const auto& src = j.coeffs();
  for (const auto& l : j.layout()->lowering(v)) c[l.dst] += l.factor * src[l.src];
  return Jet(out_layout, std::move(c));
}

Jet truncate(const Jet& j, int order) {
  if (j.is_constant() || order >= j.order()) return j;
  if (order < 0) throw InvalidInput("cannot truncate a jet to negative order");
  auto layout = JetLayout::get(j.n_vars(), order);
  return Jet(layout, j.coeffs().head(static_cast<Eigen::Index>(layout->size())));
}

Jet restrict_variables(const Jet& j, std::span<const int> keep) {
  if (j.is_constant()) return j;
  if (keep.empty()) return Jet(j.value());
  auto layout = JetLayout::get(static_cast<int>(keep.size()), j.order());
  Eigen::VectorXd c(static_cast<Eigen::Index>(layout->size()));
  for (std::size_t k = 0; k < layout->size(); ++k) {
    MultiIndex full{};
    for (std::size_t v = 0; v < keep.size(); ++v) {
      if (keep[v] < 0 || keep[v] >= j.n_vars()) throw InvalidInput("restricted variable out of range");
      full[static_cast<std::size_t>(keep[v])] = layout->index(k)[v];
    }
    c[static_cast<Eigen::Index>(k)] = j.coeffs()[static_cast<Eigen::Index>(j.layout()->position(full))];
  }
  return Jet(layout, std::move(c));
}

JetComposer::JetComposer(std::vector<Jet> inner) : inner_(std::move(inner)) {
  if (inner_.empty()) throw InvalidInput("composition needs at least one inner jet");
  layout_ = inner_.front().layout();
  if (!layout_) throw InvalidInput("inner jets of a composition must carry a layout");
  for (auto& j : inner_) {
    if (j.is_constant() || j.layout()->n_vars() != layout_->n_vars() || j.order() != layout_->order()) {
      throw InvalidInput("inner jets of a composition must share one layout");
    }
    j.coeffs()[0] = 0.0;
  }
  outer_layout_ = JetLayout::get(static_cast<int>(inner_.size()), layout_->order());
  monomials_.reserve(outer_layout_->size());
  Jet one(layout_);
  one.coeffs()[0] = 1.0;
  monomials_.push_back(one);
  for (std::size_t k = 1; k < outer_layout_->size(); ++k) {
    MultiIndex alpha = outer_layout_->index(k);
    std::size_t v = 0;
    while (alpha[v] == 0) ++v;
    alpha[v] = static_cast<std::uint8_t>(alpha[v] - 1);
    monomials_.push_back(monomials_[outer_layout_->position(alpha)] * inner_[v]);
  }
}

Jet JetComposer::operator()(const Jet& outer) const {
  if (outer.is_constant()) return outer;
  if (outer.n_vars() != static_cast<int>(inner_.size())) {
    throw InvalidInput("outer jet variable count does not match the number of inner jets");
  }
  const int order = std::min(outer.order(), layout_->order());
  const std::size_t terms = outer.layout()->prefix_size(order);
  // Positions agree between the outer layout and outer_layout_ for degree <= order.
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_->size()));
  for (std::size_t k = 0; k < terms; ++k) {
    const double c = outer.coeffs()[static_cast<Eigen::Index>(k)];
    if (c != 0.0) acc += c * monomials_[k].coeffs();
  }
  return truncate(Jet(layout_, std::move(acc)), order);
}

}  // namespace finsler
