#pragma once

#include <Eigen/Dense>
#include <complex>

namespace fracstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Maximum absolute row sum, the operator norm induced by the max-norm.
template <typename Derived>
double row_sum_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Eigen-decomposition A = V diag(lambda) V^{-1} of a real matrix.
struct EigenDecomposition {
  CVector eigenvalues;
  CMatrix vectors;
  CMatrix inverse_vectors;
  double condition = 0.0;  // ||V|| * ||V^{-1}|| in the row-sum norm
};

}  // namespace fracstab
