#pragma once

// Empirical pth moments of simulated ensembles and the moment-stability
// verdicts built on them.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracstab/simulator.hpp"

namespace fracstab {

struct MomentCurve {
  std::vector<double> t;
  std::vector<double> m;           // sample mean of ||X||^p (or ||t^{1-a} X||^p)
  std::vector<double> half_width;  // 95% normal half-width, NaN below 30 paths
  int p = 2;
  int n_paths = 0;
  bool weighted = false;

  /// CSV `t,m,ci_half_width`.
  std::string to_csv() const;
};

struct DecayVerdict {
  double slope = 0.0;
  std::pair<double, double> slope_ci{0.0, 0.0};
  std::pair<double, double> window{0.0, 0.0};
  bool stable_p = false;
  bool asymptotically_stable_p = false;
  double sup_moment = 0.0;  // max over curves of the weighted supremum
  double tail_mean = 0.0;   // max over curves of the mean on [T/10, T]
  std::string note;

  std::string to_text() const;
};

/// Summation by recursive halving; fixed order, so bitwise reproducible.
double pairwise_sum(std::span<const double> x);

/// Per-node mean of ||.||^p over paths. The unweighted curve starts at node 1
/// and a request for node 0 throws, since X(0) is infinite.
MomentCurve pth_moment_curve(const PathEnsemble& ensemble, int p, bool weighted, int first_node = -1);

/// sup over nodes (node 0 included) of E ||t^{1-a} X(t)||^p.
double h_norm(const PathEnsemble& ensemble, int p);

/// Least-squares slope of log m against log t over the trailing
/// window_fraction of the nodes with t > 0.
DecayVerdict decay_fit(const MomentCurve& curve, double window_fraction);

/// One initial datum: its curves and ||rho||.
struct TaggedCurves {
  MomentCurve unweighted;
  MomentCurve weighted;
  double rho_norm = 0.0;
};

/// stable_p: every ||rho|| <= delta and every weighted supremum < epsilon.
/// asymptotically_stable_p: stable_p, every tail mean on [T/10, T] below
/// tail_tol and every fitted slope CI below 0 (an identically zero tail
/// counts as decayed).
DecayVerdict stability_verdict(std::span<const TaggedCurves> curves, double epsilon, double delta,
                               double tail_tol, double window_fraction = 0.5);

}  // namespace fracstab
