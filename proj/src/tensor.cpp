#include "finsler/tensor.hpp"

#include <Eigen/Eigenvalues>

namespace finsler {

double smallest_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

void require_positive_definite(const Eigen::MatrixXd& m, const char* what, double floor) {
  const double lo = smallest_eigenvalue(m);
  if (!(lo > floor)) throw NonPositiveDefinite(lo, what);
}

}  // namespace finsler
