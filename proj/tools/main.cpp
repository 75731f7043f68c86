#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "fracstab/error.hpp"

using namespace fracstab;
using namespace fracstab::cli;

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::numeric:
    case ErrorKind::non_convergence: return numeric_failure;
    case ErrorKind::precondition: return criterion_fail;
    default: return config_error;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional stochastic neutral equations: stability certificates and Monte Carlo"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::string out_dir, scheme;
  std::uint64_t seed = 0;

  const auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides output.directory)");
    cmd->add_option("--seed", seed, "master seed (overrides monte_carlo.master_seed)");
    cmd->add_option("--scheme", scheme, "mild, integral_form or picard")
        ->check(CLI::IsMember({"mild", "integral_form", "picard"}));
    cmd->add_flag("--as-printed", overrides.as_printed,
                  "integral form with A g in the memory term, as originally printed");
  };

  auto* check = app.add_subcommand("check", "compute the stability certificate");
  add_run_flags(check);
  auto* simulate = app.add_subcommand("simulate", "simulate paths and moment curves");
  add_run_flags(simulate);
  auto* convergence = app.add_subcommand("convergence", "self-convergence study on shared noise");
  add_run_flags(convergence);

  auto* ml = app.add_subcommand("ml", "evaluate E_{alpha,beta}(z)");
  double alpha = 0.0, beta = 0.0, z_re = 0.0, z_im = 0.0;
  ml->add_option("alpha", alpha)->required();
  ml->add_option("beta", beta)->required();
  ml->add_option("z", z_re, "real part of z")->required();
  ml->add_option("--imag", z_im, "imaginary part of z");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (ml->parsed()) return cmd_ml(alpha, beta, {z_re, z_im});

    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (!scheme.empty()) overrides.scheme = scheme;
    for (auto* cmd : {check, simulate, convergence})
      if (cmd->parsed() && cmd->count("--seed")) overrides.seed = seed;

    const RunConfig config = apply(load_config(config_path), overrides);
    if (check->parsed()) return cmd_check(config);
    if (simulate->parsed()) return cmd_simulate(config);
    return cmd_convergence(config);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]";
    if (!e.field().empty()) std::cerr << " at " << e.field();
    std::cerr << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  }
}
