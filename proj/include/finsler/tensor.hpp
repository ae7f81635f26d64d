#pragma once

// Dense coordinate tensors of any rank over a scalar type (double or Jet), and
// the small linear-algebra kernels the geometry needs on both.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"

namespace finsler {

template <class Scalar>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, const Scalar& fill = Scalar(0.0)) : dim_(dim), rank_(rank) {
    std::size_t count = 1;
    for (int r = 0; r < rank; ++r) count *= static_cast<std::size_t>(dim);
    data_.assign(count, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  std::vector<Scalar>& data() { return data_; }
  const std::vector<Scalar>& data() const { return data_; }

  template <class... I>
  Scalar& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  const Scalar& operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  Scalar& at(std::span<const int> idx) { return data_[flat_span(idx)]; }
  const Scalar& at(std::span<const int> idx) const { return data_[flat_span(idx)]; }

  /// Multi-index of flat position k, first index most significant.
  std::vector<int> unflatten(std::size_t k) const {
    std::vector<int> idx(static_cast<std::size_t>(rank_));
    for (int r = rank_ - 1; r >= 0; --r) {
      idx[static_cast<std::size_t>(r)] = static_cast<int>(k % static_cast<std::size_t>(dim_));
      k /= static_cast<std::size_t>(dim_);
    }
    return idx;
  }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t k = 0;
    ((k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return k;
  }
  std::size_t flat_span(std::span<const int> idx) const {
    std::size_t k = 0;
    for (int i : idx) k = k * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return k;
  }

  int dim_{0};
  int rank_{0};
  std::vector<Scalar> data_;
};

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline Tensor<double> values(const Tensor<Jet>& t) {
  Tensor<double> out(t.dim(), t.rank());
  for (std::size_t k = 0; k < t.size(); ++k) out.data()[k] = t.data()[k].value();
  return out;
}

inline Tensor<Jet> truncate(const Tensor<Jet>& t, int order) {
  Tensor<Jet> out = t;
  for (auto& j : out.data()) j = truncate(j, order);
  return out;
}

/// Lowest order among the non-constant entries (or `fallback` if all constant).
inline int min_order(const Tensor<Jet>& t, int fallback) {
  int o = fallback;
  for (const auto& j : t.data()) {
    if (!j.is_constant()) o = std::min(o, j.order());
  }
  return o;
}

template <class Scalar>
struct SpdFactor {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inverse;
  Scalar log_det;
};

/// Gauss-Jordan inverse without pivoting, valid for symmetric positive-definite
/// input (all pivots positive); the log-determinant is the sum of log pivots.
/// Works unchanged on jets, where it propagates every Taylor coefficient.
template <class Scalar>
SpdFactor<Scalar> spd_inverse(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
  using std::log;
  const Eigen::Index n = m.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a = m;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inv(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) inv(i, j) = Scalar(i == j ? 1.0 : 0.0);
  }
  Scalar log_det(0.0);
  for (Eigen::Index p = 0; p < n; ++p) {
    const Scalar pivot = a(p, p);
    if (!(value_of(pivot) > 0.0)) throw NonPositiveDefinite(value_of(pivot), "matrix pivot");
    log_det = log_det + log(pivot);
    const Scalar r = Scalar(1.0) / pivot;
    for (Eigen::Index j = 0; j < n; ++j) {
      a(p, j) = a(p, j) * r;
      inv(p, j) = inv(p, j) * r;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == p) continue;
      const Scalar f = a(i, p);
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = a(i, j) - f * a(p, j);
        inv(i, j) = inv(i, j) - f * inv(p, j);
      }
    }
  }
  return {std::move(inv), log_det};
}

inline Eigen::MatrixXd values(const JetMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).value();
  }
  return out;
}

inline Eigen::VectorXd values(const JetVector& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

inline JetMatrix truncate(const JetMatrix& m, int order) {
  JetMatrix out = m;
  for (Eigen::Index k = 0; k < out.size(); ++k) out.data()[k] = truncate(out.data()[k], order);
  return out;
}

/// Smallest eigenvalue of a symmetric matrix.
double smallest_eigenvalue(const Eigen::MatrixXd& m);

/// Throws NonPositiveDefinite when the smallest eigenvalue is below `floor`.
void require_positive_definite(const Eigen::MatrixXd& m, const char* what, double floor = 1e-10);

}  // namespace finsler
