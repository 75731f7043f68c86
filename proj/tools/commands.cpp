#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fracstab/criteria.hpp"
#include "fracstab/error.hpp"
#include "fracstab/format.hpp"
#include "fracstab/moments.hpp"

namespace fracstab::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::config, "cannot write " + path.string(), "output.directory");
  out << content;
}

fs::path prepare_dir(const RunConfig& config) {
  const fs::path dir(config.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::config, "cannot create " + dir.string() + ": " + ec.message(), "output.directory");
  return dir;
}

CertifyOptions certify_options(const RunConfig& config) {
  CertifyOptions o;
  o.epsilon = config.epsilon;
  o.M_override = config.M_override;
  return o;
}

PathEnsemble run_scheme(const RunConfig& config, const SystemSpec& system, const TimeGrid& grid,
                        const BrownianEnsemble& noise) {
  SimulationOptions options;
  options.as_printed = config.as_printed;
  const Scheme scheme = scheme_from_string(config.scheme);
  if (scheme == Scheme::mild) return simulate_mild(system, grid, noise, options);
  if (scheme == Scheme::integral_form) return simulate_integral_form(system, grid, noise, options);

  // picard: one whole-path iteration per path, assembled into an ensemble
  std::vector<PicardResult> results(noise.n_paths);
  std::vector<std::string> failures(noise.n_paths);
  parallel_for(noise.n_paths, default_workers(), [&](int i) {
    try {
      results[i] = picard_path_solve(system, grid, noise.path(i));
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  PathEnsemble out;
  out.grid = grid;
  out.n_paths = noise.n_paths;
  out.dim = system.dim();
  out.scheme = Scheme::picard;
  out.master_seed = noise.master_seed;
  out.system_digest = system.digest();
  const std::size_t stride = std::size_t(grid.N + 1) * out.dim;
  out.values.assign(stride * out.n_paths, std::nan(""));
  out.weighted.assign(stride * out.n_paths, std::nan(""));
  out.status.assign(out.n_paths, PathStatus::ok);
  out.diagnostics.assign(out.n_paths, {});
  for (int i = 0; i < out.n_paths; ++i) {
    if (!failures[i].empty()) {
      out.status[i] = PathStatus::non_convergence;
      out.diagnostics[i] = failures[i];
      continue;
    }
    std::copy(results[i].path.values.begin(), results[i].path.values.end(), out.values.begin() + i * stride);
    std::copy(results[i].path.weighted.begin(), results[i].path.weighted.end(),
              out.weighted.begin() + i * stride);
  }
  return out;
}

}  // namespace

RunConfig apply(RunConfig config, const Overrides& overrides) {
  if (overrides.out_dir) config.directory = *overrides.out_dir;
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.scheme) config.scheme = *overrides.scheme;
  if (overrides.as_printed) config.as_printed = true;
  config.validate();
  return config;
}

int cmd_check(const RunConfig& config) {
  const SystemSpec system = config.system();
  const Certificate cert = certify(system, config.T, certify_options(config));
  const fs::path dir = prepare_dir(config);
  write_file(dir / "certificate.txt", cert.to_text());
  std::cout << cert.to_text();
  if (!cert.verdict_existence) {
    std::cerr << "criterion failed: " << (cert.note.empty() ? "theta >= 1" : cert.note) << '\n';
    return criterion_fail;
  }
  return ok;
}

int cmd_simulate(const RunConfig& config) {
  SystemSpec system = config.system();
  const Certificate cert = certify(system, config.T, certify_options(config));
  if (config.scale_rho_to_delta) {
    if (!(cert.delta > 0.0)) {
      std::cerr << "criterion failed: no admissible delta (" << cert.note << ")\n";
      return criterion_fail;
    }
    const double norm = system.rho.norm();
    if (norm == 0.0) throw Error(ErrorKind::config, "cannot scale a zero rho to delta", "system.rho");
    system.rho *= cert.delta / norm;
  }

  const TimeGrid grid = config.grid();
  const BrownianEnsemble noise = brownian_increments(grid, config.n_paths, config.master_seed);
  const PathEnsemble paths = run_scheme(config, system, grid, noise);

  const fs::path dir = prepare_dir(config);
  std::string meta = paths.metadata();
  meta += "alpha = " + format_double(config.alpha) + '\n';
  meta += "p = " + std::to_string(config.p) + '\n';
  meta += "coefficient_family = " + config.coefficients.family + '\n';
  meta += "rho_norm = " + format_double(system.rho.norm()) + '\n';
  write_file(dir / "meta.txt", meta);
  write_file(dir / "certificate.txt", cert.to_text());

  if (const int bad = paths.first_failure(); bad >= 0) {
    std::cerr << "numeric failure on path " << bad << ": " << paths.diagnostics[bad] << '\n';
    return numeric_failure;
  }

  TaggedCurves curves{pth_moment_curve(paths, config.p, false), pth_moment_curve(paths, config.p, true),
                      system.rho.norm()};
  write_file(dir / "moments.csv", curves.unweighted.to_csv());
  write_file(dir / "moments_weighted.csv", curves.weighted.to_csv());
  const DecayVerdict verdict = stability_verdict(std::span<const TaggedCurves>(&curves, 1), config.epsilon,
                                                 cert.delta, config.tail_tol, config.window_fraction);
  std::string text = verdict.to_text();
  text += "epsilon = " + format_double(config.epsilon) + '\n';
  text += "delta = " + format_double(cert.delta) + '\n';
  text += "h_norm = " + format_double(*std::max_element(curves.weighted.m.begin(), curves.weighted.m.end())) + '\n';
  write_file(dir / "verdict.txt", text);
  if (config.emit_paths) write_file(dir / "paths.csv", paths.to_csv());
  std::cout << text;
  return ok;
}

int cmd_ml(double alpha, double beta, std::complex<double> z) {
  const MLValue v = ml_scalar(alpha, beta, z);
  char buf[64];
  if (z.imag() == 0.0 && std::abs(v.value.imag()) <= 1e-15 * std::max(1.0, std::abs(v.value.real()))) {
    std::snprintf(buf, sizeof buf, "%.15g", v.value.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.15g%+.15gi", v.value.real(), v.value.imag());
  }
  std::cout << buf << '\n';
  if (v.status != MLStatus::ok) std::cerr << "warning: " << to_string(v.status) << '\n';
  return ok;
}

int cmd_convergence(const RunConfig& config) {
  const SystemSpec system = config.system();
  constexpr int reference_factor = 16;
  const TimeGrid fine{config.T, config.N * reference_factor};
  const BrownianEnsemble fine_noise = brownian_increments(fine, config.n_paths, config.master_seed);
  const PathEnsemble reference = run_scheme(config, system, fine, fine_noise);
  if (const int bad = reference.first_failure(); bad >= 0) {
    std::cerr << "numeric failure on reference path " << bad << ": " << reference.diagnostics[bad] << '\n';
    return numeric_failure;
  }

  std::string csv = "N,weighted_sup_error,observed_order\n";
  double previous = 0.0;
  for (int level = 0; level < 3; ++level) {
    const int factor = reference_factor >> level;
    const TimeGrid grid{config.T, config.N << level};
    const PathEnsemble coarse = run_scheme(config, system, grid, fine_noise.coarsen(factor));
    if (const int bad = coarse.first_failure(); bad >= 0) {
      std::cerr << "numeric failure on path " << bad << " at N = " << grid.N << ": " << coarse.diagnostics[bad]
                << '\n';
      return numeric_failure;
    }
    // root mean square over paths of the weighted sup-norm error
    std::vector<double> sq(config.n_paths);
    for (int i = 0; i < config.n_paths; ++i) {
      double sup = 0.0;
      for (int j = 0; j <= grid.N; ++j) {
        const double* a = coarse.weighted_value(i, j);
        const double* b = reference.weighted_value(i, j * factor);
        double d = 0.0;
        for (int c = 0; c < coarse.dim; ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
        sup = std::max(sup, std::sqrt(d));
      }
      sq[i] = sup * sup;
    }
    const double error = std::sqrt(pairwise_sum(sq) / config.n_paths);
    std::string order;
    if (level > 0) {
      if (error <= 1e-10 || previous <= 1e-10) order = "saturated";
      else order = format_double(std::log2(previous / error));
    }
    csv += std::to_string(grid.N) + ',' + format_double(error) + ',' + order + '\n';
    previous = error;
  }
  const fs::path dir = prepare_dir(config);
  write_file(dir / "convergence.csv", csv);
  std::cout << csv;
  return ok;
}

}  // namespace fracstab::cli
