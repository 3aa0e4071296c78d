#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "homokin/errors.hpp"
#include "homokin/harness.hpp"

namespace fs = std::filesystem;
using namespace homokin;

namespace {

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string placement;
  std::optional<std::string> eps;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required = false) {
  auto* opt = cmd->add_option("--config", f.config, "sectioned key = value config file");
  if (config_required) opt->required();
  cmd->add_option("--preset", f.preset, "preset id");
  cmd->add_option("--placement", f.placement, "inside | outside");
  cmd->add_option("--eps", f.eps, "comma-separated epsilon sweep, e.g. 1/10,1/20");
  cmd->add_option("--out", f.out, "output directory (default $HOMOKIN_OUT or ./out)");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--seed", f.seed, "random seed");
}

ExperimentConfig build_config(const CommonFlags& f, std::optional<ProblemKind> kind) {
  ExperimentConfig c = f.config.empty() ? default_config(*kind) : load_config(f.config, kind);
  if (!f.preset.empty()) c.preset = f.preset;
  if (!f.placement.empty()) c.placement = parse_placement(f.placement);
  if (f.eps) c.epsilons = parse_eps_list(*f.eps);
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.workers) c.workers = *f.workers;
  if (f.seed) c.seed = *f.seed;
  return c;
}

int report(const RunResult& r) {
  if (r.status != 0) {
    std::cerr << "homokin: " << r.message << "\n";
    return r.status;
  }
  for (const auto& file : r.files) std::cout << file.generic_string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale homogenization experiments"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    ProblemKind kind;
  };
  const Command kinds[] = {
      {"tartar", "memory-kernel Laplace transform against the harmonic-mean formula", ProblemKind::tartar},
      {"ode", "homogenized ODE routes and weak convergence", ProblemKind::ode},
      {"boltzmann", "energy toy model sweep: mode errors, norm difference, rates", ProblemKind::boltzmann},
      {"transport", "kinetic transport: coercivity and weak error sweep", ProblemKind::transport},
      {"oscillator", "oscillating rotation limit through the regularized kernel", ProblemKind::oscillator},
  };

  std::vector<CommonFlags> flags(std::size(kinds));
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < std::size(kinds); ++i) {
    auto* cmd = app.add_subcommand(kinds[i].name, kinds[i].help);
    add_common(cmd, flags[i]);
    commands.push_back(cmd);
  }
  std::string example;
  commands[2]->add_option("--example", example, "alias of --preset (1, 2 or 3)");

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "run the experiment described by a config file");
  add_common(sweep, sweep_flags, true);

  CommonFlags dump_flags;
  auto* dump = app.add_subcommand("kernel-dump", "tabulate the memory kernel K(tau) of a tartar preset");
  add_common(dump, dump_flags);
  std::optional<double> dump_t;
  std::optional<std::size_t> dump_steps;
  std::optional<std::size_t> dump_cells;
  dump->add_option("--T", dump_t, "lag horizon (default 20)");
  dump->add_option("--steps", dump_steps, "lag steps (default 4000)");
  dump->add_option("--n-cell", dump_cells, "cell grid size (default 256)");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "write a gnuplot script for CSV outputs");
  plot->add_option("csv", plot_inputs, "CSV files")->required();
  plot->add_option("--out", plot_out, "script path (default plot.gp beside the first CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!commands[i]->parsed()) continue;
      if (!example.empty()) flags[i].preset = example;
      return report(run_experiment(build_config(flags[i], kinds[i].kind)));
    }
    if (sweep->parsed()) return report(run_experiment(build_config(sweep_flags, std::nullopt)));
    if (dump->parsed()) {
      auto c = build_config(dump_flags, ProblemKind::tartar);
      if (dump_flags.config.empty()) {
        c.grid.n_cell = 256;
        c.grid.T = 20.0;
        c.grid.time_steps = 4000;
      }
      if (dump_t) c.grid.T = *dump_t;
      if (dump_steps) c.grid.time_steps = *dump_steps;
      if (dump_cells) c.grid.n_cell = *dump_cells;
      return report(dump_kernel(c));
    }
    if (plot->parsed()) {
      std::vector<fs::path> csvs(plot_inputs.begin(), plot_inputs.end());
      const fs::path script = plot_out.empty() ? fs::absolute(csvs.front()).parent_path() / "plot.gp" : fs::path(plot_out);
      emit_plot_script(csvs, script);
      std::cout << script.generic_string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "homokin: invalid configuration: " << e.what() << "\n";
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "homokin: " << e.what() << "\n";
    return exit_numerical_error;
  }
  return 0;
}
