#pragma once

// Eigenvalues, the sector condition spec(A) in {|arg lambda| > alpha pi / 2},
// and numerical profiles of the Mittag-Leffler decay bounds that the sector
// condition guarantees.

#include <optional>
#include <string>
#include <vector>

#include "fracstab/fraccalc.hpp"
#include "fracstab/linalg.hpp"

namespace fracstab {

struct Spectrum {
  std::vector<Complex> eigenvalues;
  double residual = 0.0;  // max ||A v - lambda v|| / ||v||
};

struct SectorVerdict {
  bool in_sector = false;
  double margin = 0.0;  // min |arg lambda| - alpha pi / 2, radians
  std::optional<Complex> offending_eigenvalue;
};

/// Uniform time grid description used by the profiling routines.
struct ProfileGrid {
  double t_max = 0.0;
  int nodes = 0;
  double step() const { return t_max / (nodes - 1); }
};

struct Lemma21Report {
  double m_sup = 0.0;    // sup_{[0, t_max]} ||E_{a,a}(t^a A)||
  double t0 = 0.0;       // start of the non-increasing tail of t^{2a} ||E_{a,a}(t^a A)||
  double m_tilde = 0.0;  // sup_{t >= t0} t^{2a} ||E_{a,a}(t^a A)||
  double conv_sup = 0.0; // sup_t t^{1-a} int_0^t (t-s)^{a-1} ||E((t-s)^a A)|| s^{a-1} ds
  ProfileGrid grid_used;

  bool diverged = false;
  std::string diagnostic;

  // Profiles on the grid, index i <-> t = i * grid_used.step().
  std::vector<double> decay_profile;       // t^{2a} ||E_{a,a}(t^a A)||
  std::vector<double> convolution_profile; // the weighted convolution above
  // Relative change of the running sups over the last decade
  // [t_max / 10, t_max] and the last half [t_max / 2, t_max]. Divergence is
  // declared when either running sup still grows by 1% over the last half.
  double conv_growth_last_decade = 0.0;
  double conv_growth_last_half = 0.0;
  double decay_growth_last_decade = 0.0;
  double decay_growth_last_half = 0.0;
};

/// All eigenvalues via Hessenberg reduction and shifted QR (at most 100 n
/// sweeps). Throws Error(non_convergence) on failure.
Spectrum eigenvalues(const Matrix& a);

/// Eigen-decomposition with eigenvector condition estimate, for the
/// diagonalization path of ml_matrix.
EigenDecomposition eigen_decomposition(const Matrix& a);

SectorVerdict sector_check(const Spectrum& spectrum, double alpha);

/// Max over a uniform grid on [0, T] (both ends included) of the row-sum norm
/// of E_{alpha,alpha}(t^alpha A).
double ml_norm_sup(const Matrix& a, double alpha, double horizon, int n_nodes,
                   const MLEvalPolicy& policy = {});

/// Grid profiling of the two decay bounds. Requires the sector condition and
/// t_max >= 10; an out-of-sector matrix yields a report with diverged = true.
Lemma21Report lemma21_profile(const Matrix& a, double alpha, double t_max, int n_nodes,
                              const MLEvalPolicy& policy = {});

}  // namespace fracstab
