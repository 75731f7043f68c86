#pragma once

// Monte Carlo construction of mild solutions on a uniform grid.
//
// Node 0 is stored only in weighted form Y = t^{1-a} X, since X itself
// behaves like t^{a-1} there. On the first cell every coefficient is split
// into its weighted limit (integrated exactly against tau^{a-1}) and a
// bounded remainder evaluated at the right end of the cell.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracstab/system.hpp"

namespace fracstab {

struct TimeGrid {
  double T = 1.0;
  int N = 2;

  double step() const { return T / N; }
  double t(int j) const { return j == N ? T : T * j / N; }
  void validate() const;
};

enum class Scheme { mild, integral_form, picard, closed_form };

const char* to_string(Scheme scheme) noexcept;
Scheme scheme_from_string(const std::string& name);

/// Scalar Brownian increments, one row of N per path.
struct BrownianEnsemble {
  TimeGrid grid;
  int n_paths = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> increments;  // n_paths x N, row-major

  const double* path(int i) const { return increments.data() + std::size_t(i) * grid.N; }

  /// Sums groups of `factor` consecutive increments; the same Brownian paths
  /// on a grid with N / factor steps.
  BrownianEnsemble coarsen(int factor) const;
};

enum class PathStatus { ok, non_convergence, overflow };

const char* to_string(PathStatus status) noexcept;

struct PathEnsemble {
  TimeGrid grid;
  int n_paths = 0;
  int dim = 1;
  Scheme scheme = Scheme::mild;
  bool as_printed = false;
  std::uint64_t master_seed = 0;
  std::string system_digest;
  // n_paths x (N + 1) x dim; values at node 0 are NaN
  std::vector<double> values;
  std::vector<double> weighted;
  std::vector<PathStatus> status;
  std::vector<std::string> diagnostics;  // empty for ok paths

  std::size_t offset(int path, int node) const {
    return (std::size_t(path) * (grid.N + 1) + node) * dim;
  }
  const double* value(int path, int node) const { return values.data() + offset(path, node); }
  const double* weighted_value(int path, int node) const { return weighted.data() + offset(path, node); }
  /// Index of the first failed path, or -1.
  int first_failure() const;

  /// CSV `path,node,t,weighted_0..,value_0..` with 17 significant digits.
  std::string to_csv() const;
  std::string metadata() const;
};

/// Path i is driven by mt19937_64 seeded with splitmix64(master_seed, i),
/// and Box-Muller normals, so the result does not depend on scheduling.
BrownianEnsemble brownian_increments(const TimeGrid& grid, int n_paths, std::uint64_t master_seed);

struct SimulationOptions {
  double inner_tol = 1e-12;
  int inner_max_iter = 100;
  bool as_printed = false;  // integral form only: use A g instead of A X
  int workers = 0;          // 0: FRACSTAB_WORKERS or hardware concurrency
};

PathEnsemble simulate_mild(const SystemSpec& system, const TimeGrid& grid,
                           const BrownianEnsemble& ensemble, const SimulationOptions& options = {});

PathEnsemble simulate_integral_form(const SystemSpec& system, const TimeGrid& grid,
                                    const BrownianEnsemble& ensemble,
                                    const SimulationOptions& options = {});

struct PicardResult {
  PathEnsemble path;  // single path
  int iterations = 0;    // applications needed to reach the fixed point
  int applications = 0;  // including the confirming one
  double last_change = 0.0;       // weighted sup-norm of the final update
  double contraction_ratio = 0.0; // last successive-difference quotient
};

/// Whole-path Picard iteration of the discrete mild map from X = 0. Throws
/// Error(non_convergence) after max_iter applications, quoting the last ratio.
PicardResult picard_path_solve(const SystemSpec& system, const TimeGrid& grid,
                               const double* path_increments, int max_iter = 200,
                               double tol = 1e-10);

/// X(t) = t^{a-1} E_{a,a}(t^a A) rho on the grid; weighted node 0 is rho / Gamma(a).
PathEnsemble closed_form_homogeneous(const Matrix& A, const Vector& rho, double alpha,
                                     const TimeGrid& grid);

/// Worker count from FRACSTAB_WORKERS when set, otherwise hardware concurrency.
int default_workers();

/// Runs body(i) for i in [0, n) on `workers` threads with a static split.
void parallel_for(int n, int workers, const std::function<void(int)>& body);

}  // namespace fracstab
