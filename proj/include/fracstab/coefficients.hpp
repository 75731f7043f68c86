#pragma once

// The coefficient triple (g, b, sigma) of the neutral equation, built-in
// families and randomized verifiers for the Lipschitz and vanishing
// assumptions.

#include <cstdint>
#include <functional>
#include <string>

#include "fracstab/linalg.hpp"

namespace fracstab {

using CoeffFn = std::function<Vector(double t, const Vector& x)>;

// Weighted limit lim_{t -> 0} t^{1-a} f(t, t^{a-1} y). The simulators need it
// on the first cell, where X itself blows up like t^{a-1}.
using RecessionFn = std::function<Vector(const Vector& y)>;

enum class CoefficientFamily { zero, linear, bounded_smooth, additive_noise, custom };

const char* to_string(CoefficientFamily family) noexcept;

struct CoefficientSet {
  CoeffFn g, b, sigma;
  RecessionFn g_rec, b_rec, sigma_rec;  // empty means: estimate numerically
  double L_g = 0.0, L_b = 0.0, L_sigma = 0.0;
  CoefficientFamily family = CoefficientFamily::zero;
  int dim = 1;
  // Test-only families may break g(t,0) = b(t,0) = sigma(t,0) = 0; the
  // simulator refuses them unless this is set.
  bool allow_nonvanishing = false;
  // Custom sets stay unverified until both verifiers pass.
  bool assumptions_verified = true;
  std::string params;  // canonical parameter text, feeds the system digest

  void validate() const;
};

CoefficientSet make_zero(int dim);

/// g = G x, b = B x, sigma = S x. Declared constants are max(row-sum norm,
/// spectral norm) so that they bound the Euclidean ratio as well.
CoefficientSet make_linear(const Matrix& G, const Matrix& B, const Matrix& S);

/// Each coefficient is c * sin(x) componentwise.
CoefficientSet make_bounded_smooth(int dim, double c_g, double c_b, double c_s);

/// g = b = 0 and sigma = s (constant). Violates the vanishing assumption and
/// is only accepted with allow_nonvanishing.
CoefficientSet make_additive_noise(int dim, double s);

/// Arbitrary user maps. Marked unverified; recession limits are estimated.
CoefficientSet make_custom(int dim, CoeffFn g, CoeffFn b, CoeffFn sigma, double L_g,
                           double L_b, double L_sigma);

/// Evaluates the recession limit, using `rec` when set and otherwise
/// f(0, s y) / s at a large s.
Vector recession(const CoeffFn& f, const RecessionFn& rec, const Vector& y);

struct LipschitzReport {
  double max_ratio = 0.0;
  bool pass = true;
  // the pair realising max_ratio
  double witness_t = 0.0;
  Vector witness_x, witness_y;
};

/// Random pairs from the ball of radius 10 and times in [0, T]. Passes iff
/// every Euclidean ratio stays below L_declared * (1 + 1e-9).
LipschitzReport verify_lipschitz(const CoeffFn& f, double L_declared, int n, int n_trials,
                                 std::uint64_t seed, double T = 1.0);

/// True iff ||f(t, 0)|| <= 1e-14 at n_nodes uniform nodes of [0, T].
bool verify_vanishing(const CoeffFn& f, int n, double T, int n_nodes);

/// Runs both verifiers on all three maps and sets assumptions_verified.
bool verify_assumptions(CoefficientSet& coeffs, double T, std::uint64_t seed = 1);

}  // namespace fracstab
