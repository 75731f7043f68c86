#pragma once

// JSON run configuration for the command-line tool.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "fracstab/simulator.hpp"

namespace fracstab::cli {

struct CoefficientConfig {
  std::string family = "zero";  // zero | linear | bounded_smooth | additive_noise
  Matrix G, B, S;               // linear
  double c_g = 0.0, c_b = 0.0, c_s = 0.0;  // bounded_smooth
  double s = 0.0;                          // additive_noise
};

struct RunConfig {
  Matrix A;
  Vector rho;
  double alpha = 0.75;
  int p = 2;
  CoefficientConfig coefficients;

  double T = 1.0;
  int N = 256;

  int n_paths = 100;
  std::uint64_t master_seed = 1;
  std::string scheme = "mild";
  bool as_printed = false;

  double epsilon = 1.0;
  double window_fraction = 0.5;
  double tail_tol = 1e-2;
  std::optional<double> M_override;
  bool scale_rho_to_delta = false;

  std::string directory = "out";
  bool emit_paths = false;

  /// Checks every field; throws Error(config) naming the field.
  void validate() const;
  SystemSpec system() const;
  TimeGrid grid() const { return {T, N}; }
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace fracstab::cli
