#pragma once

#include <string>

#include "fracstab/coefficients.hpp"
#include "fracstab/fraccalc.hpp"
#include "fracstab/linalg.hpp"

namespace fracstab {

/// One problem instance: D^a (X + g) = A X + b + sigma dW/dt with the
/// weighted initial condition I^{1-a}(X + g)(0) = rho.
struct SystemSpec {
  Matrix A;
  Vector rho;
  CoefficientSet coeffs;
  FractionalOrder order;

  int dim() const { return static_cast<int>(A.rows()); }
  void validate() const;
  /// Short stable text digest of A, rho, order and coefficient family.
  std::string digest() const;
};

}  // namespace fracstab
