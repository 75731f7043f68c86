#pragma once

// Special functions (Gamma, Beta, Mittag-Leffler) and discrete
// Riemann-Liouville operators on uniform grids.

#include <complex>
#include <span>
#include <vector>

#include "fracstab/linalg.hpp"

namespace fracstab {

/// Fractional order alpha and the integer moment order p.
struct FractionalOrder {
  double alpha = 0.75;
  int p = 2;

  /// Throws Error(domain) unless 1/2 < alpha <= 1 and p >= 2.
  void validate() const;
};

struct MLEvalPolicy {
  double series_tol = 1e-15;
  int series_max_terms = 1000;
  double asymptotic_switch_radius = 25.0;
  int asymptotic_terms = 10;
  // |z| up to which the power series is summed directly. Beyond it the
  // alternating series cancels catastrophically and the contour integral
  // (or the asymptotic expansion) takes over.
  double series_radius = 1.0;

  void validate() const;
};

// closed_form: E_{1,1}(z) = exp(z), the only exact reduction used.
enum class MLBranch { series, asymptotic, contour, diagonalized, zero, closed_form };
enum class MLStatus { ok, accuracy_warning, conditioning_warning };

const char* to_string(MLBranch branch) noexcept;
const char* to_string(MLStatus status) noexcept;

struct MLValue {
  std::complex<double> value;
  MLBranch branch = MLBranch::series;
  MLStatus status = MLStatus::ok;
  int terms = 0;  // series terms, asymptotic terms or contour nodes
};

struct MLMatrixValue {
  Matrix value;
  MLBranch branch = MLBranch::series;
  MLStatus status = MLStatus::ok;
  int terms = 0;
};

/// Gamma function. Lanczos approximation (g = 607/128, 15 coefficients)
/// with reflection for x < 0.5. Throws Error(pole) at nonpositive integers.
double gamma_fn(double x);

/// Beta function B(a, b) for a, b > 0.
double beta_fn(double a, double b);

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z).
MLValue ml_scalar(double alpha, double beta, std::complex<double> z,
                  const MLEvalPolicy& policy = {});

/// Real-argument convenience wrapper returning the real part.
double ml_real(double alpha, double beta, double z,
               const MLEvalPolicy& policy = {});

/// Matrix Mittag-Leffler function sum_k M^k / Gamma(alpha k + beta).
///
/// Small-norm arguments use the term-recursive series. Larger ones use a
/// contour integral of the resolvent when every pole of the Laplace
/// transform is admissible, otherwise diagonalization. Passing
/// `decomposition` requests the diagonalization path directly; it is used
/// when its eigenvector condition number is at most 1e8 and otherwise
/// reported as a conditioning warning.
MLMatrixValue ml_matrix(double alpha, double beta, const Matrix& m,
                        const MLEvalPolicy& policy = {},
                        const EigenDecomposition* decomposition = nullptr);

/// Left-endpoint product integration of I^alpha on a uniform grid with the
/// given step. Node 0 of the output is zero.
std::vector<Vector> rl_integral_grid(std::span<const Vector> samples, double step,
                                     double alpha);

/// D^alpha computed as a backward difference of I^{1-alpha}. Node 0 reuses
/// the forward difference.
std::vector<Vector> rl_derivative_grid(std::span<const Vector> samples, double step,
                                       double alpha);

namespace detail {

/// Integral over [0, 1] of s^{a-1} (n - s)^{b-1}, for n >= 1, a, b > 0.
/// Closed form B(a, b) at n = 1, hypergeometric series otherwise.
double first_cell_moment(double n, double a, double b);

}  // namespace detail

}  // namespace fracstab
