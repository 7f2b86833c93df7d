#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace vpm::cli;

namespace {

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)");
  cmd->add_option("--n-trunc", o.n_trunc, "Harmonic truncation N");
  cmd->add_option("--ode-rtol", o.ode_rtol, "ODE relative tolerance");
  cmd->add_option("--ode-atol", o.ode_atol, "ODE absolute tolerance");
  cmd->add_option("--csv", o.csv, "CSV output path (stdout if unset)");
  cmd->add_option("--json", o.json, "JSON metadata path (default: CSV path + .json)");
  cmd->add_option("--cache-dir", o.cache_dir, "Directory for resumable per-node results");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir energy between dielectric gratings by the variable phase method"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  DiagnosticsRequest diag;
  std::string axis = "real";
  std::optional<int> channels;
  std::optional<std::uint64_t> seed;

  auto* validate = app.add_subcommand("validate", "Check the profile and quadrature of a config");
  auto* diagnostics = app.add_subcommand("diagnostics", "Per-channel S-matrix health checks");
  auto* energy = app.add_subcommand("energy", "Energy sweep over the (delta_z, delta_x) grid");
  auto* slab = app.add_subcommand("slab-baseline", "Energy of the equivalent planar slabs");
  for (auto* cmd : {validate, diagnostics, energy, slab}) {
    cmd->add_option("config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    add_overrides(cmd, overrides);
  }
  diagnostics->add_option("--axis", axis, "Frequency axis")->check(CLI::IsMember({"real", "imaginary"}));
  diagnostics->add_option("--channels", channels, "Number of sampled channels");
  diagnostics->add_option("--seed", seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_error;
  }

  try {
    RunConfig config = load_config(config_path);
    apply(overrides, config);
    if (*validate) return cmd_validate(config, std::cout);
    if (*diagnostics) {
      if (channels) config.diagnostics.channels = *channels;
      if (seed) config.diagnostics.seed = *seed;
      diag.axis = axis == "real" ? vpm::Axis::real : vpm::Axis::imaginary;
      diag.csv = config.output.csv;
      return cmd_diagnostics(config, diag, std::cout, std::cerr);
    }
    if (*energy) return cmd_energy(config, std::cout, std::cerr);
    return cmd_slab_baseline(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
}
