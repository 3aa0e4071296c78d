#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homokin/energy_boltzmann.hpp"

namespace homokin {

enum class ProblemKind { tartar, ode, boltzmann, transport, oscillator };
ProblemKind parse_problem_kind(const std::string& s);
std::string to_string(ProblemKind kind);

struct GridConfig {
  std::size_t n_cell = 256;
  std::size_t n_energy = 64;
  std::size_t n_omega = 16;
  std::size_t n_r = 32;
  double T = 10.0;
  std::size_t time_steps = 50;  // dt = T / time_steps
  double points_per_period = 100.0;
};

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::boltzmann;
  std::string preset;
  Placement placement = Placement::inside;
  std::vector<double> epsilons;
  GridConfig grid;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  int modes = 8;
  std::filesystem::path source;  // config file, if any
};

// Kind-specific preset, sweep and grid defaults; the output directory is
// $HOMOKIN_OUT when set, else ./out.
ExperimentConfig default_config(ProblemKind kind);

// Throws ConfigError naming the offending field.
void validate(const ExperimentConfig& config);

// Reads a sectioned key = value file on top of default_config(kind). The kind is
// taken from [experiment] kind, or from `expected` if the file omits it; a file
// whose kind contradicts `expected` is rejected. Unknown keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ProblemKind> expected = {});

std::vector<double> parse_eps_list(const std::string& text);

struct RunResult {
  int status = 0;  // 0 ok, 2 invalid config, 3 numerical failure, 4 i/o failure
  std::string message;
  std::vector<std::filesystem::path> files;  // in write order, manifest last
  std::map<std::string, double> metrics;
};

inline constexpr int exit_config_error = 2;
inline constexpr int exit_numerical_error = 3;
inline constexpr int exit_io_error = 4;

RunResult run_experiment(const ExperimentConfig& config);

// Memory kernel table (tau, K) of a tartar preset on the configured time grid.
RunResult dump_kernel(const ExperimentConfig& config);

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// gnuplot script plotting the given CSVs, which must exist. Mode-error tables
// (epsilon,k,e_k) go on log-log axes with one series per k, norm differences on
// linear axes; when both are present they share a two-panel layout. Paths in the
// script are relative to the script's directory.
void emit_plot_script(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& script,
                      const std::filesystem::path& image = "figure.png");

}  // namespace homokin
