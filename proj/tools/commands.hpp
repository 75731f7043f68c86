#pragma once

#include <complex>
#include <optional>
#include <string>

#include "run_config.hpp"

namespace fracstab::cli {

enum ExitCode : int { ok = 0, config_error = 1, criterion_fail = 2, numeric_failure = 3 };

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scheme;
  bool as_printed = false;
};

RunConfig apply(RunConfig config, const Overrides& overrides);

/// Writes certificate.txt; 0 when the existence verdict holds, 2 otherwise.
int cmd_check(const RunConfig& config);

/// Writes moments.csv, moments_weighted.csv, verdict.txt, meta.txt,
/// certificate.txt and optionally paths.csv.
int cmd_simulate(const RunConfig& config);

/// Prints E_{alpha,beta}(z) to 15 significant digits.
int cmd_ml(double alpha, double beta, std::complex<double> z);

/// Self-convergence on shared noise: N, 2N, 4N against a 16N reference.
int cmd_convergence(const RunConfig& config);

}  // namespace fracstab::cli
