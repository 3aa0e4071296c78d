#include "homokin/harness.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "homokin/cell_calculus.hpp"
#include "homokin/csv.hpp"
#include "homokin/diagnostics.hpp"
#include "homokin/errors.hpp"
#include "homokin/memory_kernel.hpp"
#include "homokin/multiscale_ode.hpp"
#include "homokin/oscillator.hpp"
#include "homokin/parallel.hpp"
#include "homokin/transport.hpp"

#ifndef HOMOKIN_VERSION
#define HOMOKIN_VERSION "unknown"
#endif

namespace homokin {

namespace fs = std::filesystem;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(field + ": expected a number, got '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(field + ": expected a nonnegative integer, got '" + text + "'");
  return v;
}

bool is_sweep_kind(ProblemKind k) {
  return k == ProblemKind::ode || k == ProblemKind::boltzmann || k == ProblemKind::transport;
}

std::vector<double> inverse_sweep(std::initializer_list<double> inv) {
  std::vector<double> eps;
  for (double d : inv) eps.push_back(1.0 / d);
  return eps;
}

// ---- presets ---------------------------------------------------------------

CellFunction tartar_sigma(const std::string& preset, std::size_t n) {
  const PeriodicGrid g(n);
  if (preset == "sine") return CellFunction::sample(g, [](double y) { return 2.0 + 0.5 * std::sin(two_pi * y); });
  if (preset == "two-valued") return CellFunction::sample(g, [](double y) { return y < 0.5 ? 1.0 : 3.0; });
  if (preset == "two-sines")
    return CellFunction::sample(
        g, [](double y) { return 2.0 + 0.5 * std::sin(two_pi * y) + 0.25 * std::sin(2.0 * two_pi * y); });
  if (preset == "example-3")
    return CellFunction::sample(g, [](double y) { return std::sin(two_pi * y) >= 0.0 ? 2.5 : 2.0; });
  throw ConfigError("experiment.preset: unknown tartar preset '" + preset +
                    "' (expected sine, two-valued, two-sines or example-3)");
}

OdeProblem ode_preset(const std::string& preset, const GridConfig& grid) {
  OdeProblem p;
  if (preset == "example-1") {
    p.sigma = [](double, double y) { return 2.0 + 0.5 * std::sin(two_pi * y); };
    p.u_in = [](double, double y) { return 1.0 + std::sin(two_pi * y); };
  } else if (preset == "two-valued") {
    p.sigma = [](double, double y) { return y < 0.5 ? 1.0 : 3.0; };
    p.u_in = [](double, double) { return 1.0; };
  } else if (preset == "x-dependent") {
    p.sigma = [](double x, double y) { return (1.0 + 0.5 * x) * (2.0 + 0.5 * std::sin(two_pi * y)); };
    p.u_in = [](double, double) { return 1.0; };
  } else {
    throw ConfigError("experiment.preset: unknown ode preset '" + preset +
                      "' (expected example-1, two-valued or x-dependent)");
  }
  p.T = grid.T;
  p.cell = PeriodicGrid(grid.n_cell);
  return p;
}

int boltzmann_preset_id(const std::string& preset) {
  for (int id = 1; id <= 3; ++id)
    if (preset == std::to_string(id) || preset == "example-" + std::to_string(id)) return id;
  throw ConfigError("experiment.preset: unknown boltzmann preset '" + preset + "' (expected 1, 2 or 3)");
}

YoungMeasure oscillator_preset(const std::string& preset, std::size_t n_cell) {
  if (preset == "two-atom") return YoungMeasure({1.0, 3.0}, {0.5, 0.5});
  if (preset == "sine") return YoungMeasure::from_periodic([](double y) { return 2.0 + std::sin(two_pi * y); }, n_cell);
  throw ConfigError("experiment.preset: unknown oscillator preset '" + preset + "' (expected two-atom or sine)");
}

void check_preset(const ExperimentConfig& c) {
  switch (c.kind) {
    case ProblemKind::tartar: tartar_sigma(c.preset, 1); break;
    case ProblemKind::ode: ode_preset(c.preset, c.grid); break;
    case ProblemKind::boltzmann: boltzmann_preset_id(c.preset); break;
    case ProblemKind::transport:
      try {
        transport_preset(c.preset);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("experiment.preset: ") + e.what());
      }
      break;
    case ProblemKind::oscillator: oscillator_preset(c.preset, 1); break;
  }
}

std::size_t integral_points_per_period(double ppp) {
  if (ppp != std::floor(ppp)) throw ConfigError("grid.points_per_period: must be an integer for this problem kind");
  return static_cast<std::size_t>(ppp);
}

// ---- output ----------------------------------------------------------------

class Outputs {
 public:
  Outputs(const ExperimentConfig& config, RunResult& result) : dir_(config.output_dir), result_(result) {
    fs::create_directories(dir_);
  }

  fs::path save(const CsvTable& table, const std::string& name) {
    const auto path = dir_ / name;
    table.save(path);
    result_.files.push_back(path);
    return path;
  }

  fs::path save_text(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw fs::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
    result_.files.push_back(path);
    return path;
  }

  const fs::path& dir() const { return dir_; }
  RunResult& result() { return result_; }

 private:
  fs::path dir_;
  RunResult& result_;
};

std::string eps_list_text(const std::vector<double>& eps) {
  std::string s;
  for (std::size_t i = 0; i < eps.size(); ++i) s += (i ? ", " : "") + format_number(eps[i]);
  return s;
}

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "kind = " << to_string(c.kind) << "\n"
      << "preset = " << c.preset << "\n"
      << "placement = " << to_string(c.placement) << "\n"
      << "output = " << c.output_dir.generic_string() << "\n"
      << "seed = " << c.seed << "\n"
      << "workers = " << c.workers << "\n"
      << "modes = " << c.modes << "\n\n"
      << "[sweep]\n"
      << "epsilons = " << eps_list_text(c.epsilons) << "\n\n"
      << "[grid]\n"
      << "n_cell = " << c.grid.n_cell << "\n"
      << "n_energy = " << c.grid.n_energy << "\n"
      << "n_omega = " << c.grid.n_omega << "\n"
      << "n_r = " << c.grid.n_r << "\n"
      << "T = " << format_number(c.grid.T) << "\n"
      << "time_steps = " << c.grid.time_steps << "\n"
      << "points_per_period = " << format_number(c.grid.points_per_period) << "\n";
  return out.str();
}

void write_manifest(const ExperimentConfig& c, RunResult& r, double wall_seconds) {
  std::ostringstream out;
  out << config_text(c) << "\n[run]\n"
      << "version = " << HOMOKIN_VERSION << "\n"
      << "config = " << (c.source.empty() ? std::string("-") : c.source.generic_string()) << "\n"
      << "wall_time_s = " << format_number(wall_seconds) << "\n";
  if (!r.metrics.empty()) {
    out << "\n[metrics]\n";
    for (const auto& [k, v] : r.metrics) out << k << " = " << format_number(v) << "\n";
  }
  out << "\n[files]\n";
  for (const auto& f : r.files) out << f.filename().generic_string() << " = sha256:" << sha256_file(f) << "\n";
  const auto path = c.output_dir / "manifest";
  std::ofstream file(path, std::ios::binary);
  file << out.str();
  if (!file) throw fs::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
  r.files.push_back(path);
}

// ---- pipelines -------------------------------------------------------------

const std::vector<double> tartar_ps{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

void run_tartar(const ExperimentConfig& c, Outputs& out) {
  const auto sigma = tartar_sigma(c.preset, c.grid.n_cell);
  const auto report = verify_tartar_equivalence(sigma, tartar_ps, {false});
  CsvTable table({"p", "K_hat", "M_hat", "relative_error"});
  for (std::size_t i = 0; i < report.ps.size(); ++i)
    table.add_row({report.ps[i], report.semigroup_route[i], report.tartar_route[i], report.relative_errors[i]});
  out.save(table, "tartar_equiv.csv");
  out.result().metrics["max_relative_error"] = report.max_relative_error;
}

void run_ode(const ExperimentConfig& c, Outputs& out) {
  const auto p = ode_preset(c.preset, c.grid);
  const TimeGrid grid(c.grid.T, c.grid.time_steps);
  const auto closed = solve_two_scale_closed(p, grid);
  const auto coupled = solve_coupled_system(p, grid);
  const auto volterra = solve_homogenized_volterra(p, grid);
  CsvTable routes({"t", "closed", "coupled", "volterra"});
  for (std::size_t n = 0; n < closed.times.size(); ++n)
    routes.add_row({closed.times[n], closed.u_hom[n], coupled.u_hom[n], volterra.u_hom[n]});
  out.save(routes, "ode_routes.csv");
  out.result().metrics["sup_closed_volterra"] = sup_difference(closed.u_hom, volterra.u_hom);
  out.result().metrics["sup_closed_coupled"] = sup_difference(closed.u_hom, coupled.u_hom);

  const auto rows = weak_convergence_study(p, c.epsilons, default_test_functions(),
                                           integral_points_per_period(c.grid.points_per_period), c.workers);
  CsvTable weak({"test_fn", "epsilon", "weak_error"});
  for (const auto& row : rows) weak.add_row(row.test_fn, {row.epsilon, row.weak_error});
  out.save(weak, "weak_errors.csv");
}

void run_boltzmann(const ExperimentConfig& c, Outputs& out) {
  ToyProblem base = example_preset(boltzmann_preset_id(c.preset), c.placement);
  base.T = c.grid.T;
  base.time_steps = c.grid.time_steps;
  base.points_per_period = c.grid.points_per_period;

  const auto limit = solve_toy_two_scale(base, TimeGrid(base.T, base.time_steps), {c.grid.n_energy, c.grid.n_cell});
  const auto hom_modes = legendre_modes(limit.homogenized(), c.modes);

  const std::size_t n = c.epsilons.size();
  std::vector<std::vector<double>> errors(static_cast<std::size_t>(c.modes), std::vector<double>(n));
  std::vector<double> norms(n);
  parallel_for(n, c.workers, [&](std::size_t i) {
    ToyProblem p = base;
    p.epsilon = c.epsilons[i];
    const auto field = solve_toy_eps(p);
    const auto modes = legendre_modes(field, c.modes);
    for (std::size_t k = 0; k < modes.size(); ++k) errors[k][i] = mode_error(modes[k], hom_modes[k]);
    norms[i] = norm_difference(field, limit);
  });
  const auto report = build_report(c.epsilons, errors, norms);

  CsvTable modes({"epsilon", "k", "e_k"});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < errors.size(); ++k)
      modes.add_row({c.epsilons[i], static_cast<double>(k), errors[k][i]});
  CsvTable norm_diff({"epsilon", "norm_diff"});
  for (std::size_t i = 0; i < n; ++i) norm_diff.add_row({c.epsilons[i], norms[i]});
  CsvTable rates({"k", "slope", "residual"});
  for (const auto& r : report.rates) {
    if (!r.fitted) continue;
    rates.add_row({static_cast<double>(r.k), r.fit.slope, r.fit.residual});
    out.result().metrics["slope_k" + std::to_string(r.k)] = r.fit.slope;
  }
  const auto modes_path = out.save(modes, "modes.csv");
  const auto norm_path = out.save(norm_diff, "norm_diff.csv");
  out.save(rates, "rates.csv");
  emit_plot_script({modes_path, norm_path}, out.dir() / "plot.gp");
  out.result().files.push_back(out.dir() / "plot.gp");
}

void run_transport(const ExperimentConfig& c, Outputs& out) {
  const auto params = transport_preset(c.preset);
  const auto phi = transport_preset_initial();
  TransportRun run;
  run.T = c.grid.T;
  run.time_steps = c.grid.time_steps;
  run.output_stride = std::max<std::size_t>(1, c.grid.time_steps / 10);
  run.n_r = c.grid.n_r;
  run.workers = c.workers;
  check_interior(params, run);
  const TransportGrid eps_grid{c.grid.n_omega, integral_points_per_period(c.grid.points_per_period)};

  const auto hom = solve_two_scale_transport(params, phi, run, {c.grid.n_omega, c.grid.n_energy, c.grid.n_cell});

  CsvTable coercivity({"epsilon", "margin", "min_sigma", "min_quotient"});
  CsvTable weak({"epsilon", "weak_error"});
  for (double eps : c.epsilons) {
    const auto sub = subcriticality_check(params, eps, eps_grid);
    const double q = coercivity_test(params, eps, 100, c.seed, eps_grid);
    coercivity.add_row({eps, sub.margin, sub.min_sigma, q});
    const auto field = solve_characteristics_eps(params, phi, eps, run, eps_grid);
    weak.add_row({eps, transport_weak_error(field, hom.psi_hom, params.e_min, params.e_max)});
  }
  out.save(coercivity, "transport_coercivity.csv");
  out.save(weak, "transport_weak.csv");

  TransportField last = hom.psi_hom;
  last.times = {hom.psi_hom.times.back()};
  last.values = {hom.psi_hom.values.back()};
  std::ostringstream text;
  write_transport_csv(text, last);
  out.save_text("transport_hom.csv", text.str());
  out.result().metrics["max_mean_rho"] = hom.max_mean_rho;
}

void run_oscillator(const ExperimentConfig& c, Outputs& out) {
  const auto nu = oscillator_preset(c.preset, c.grid.n_cell);
  const TimeGrid grid(c.grid.T, c.grid.time_steps);
  OscillatorOptions options;
  options.workers = c.workers;
  // fixed Talbot loses accuracy to roundoff beyond t ~ 10
  if (c.grid.T > 10.0) options.inversion = KernelInversion::resolvent;
  const Eigen::Vector2d u_in(1.0, 0.0);
  const auto sol = solve_oscillator_limit(nu, u_in, grid, options);

  CsvTable limit({"t", "u1", "u2", "avg1", "avg2"});
  double dev = 0.0;
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    const auto avg = cell_averaged_limit(nu, sol.times[n], u_in);
    limit.add_row({sol.times[n], sol.values[n](0), sol.values[n](1), avg(0), avg(1)});
    dev = std::max(dev, (sol.values[n] - avg).cwiseAbs().maxCoeff());
  }
  out.save(limit, "oscillator_limit.csv");
  out.result().metrics["sup_deviation_from_average"] = dev;

  const auto kernel = options.inversion == KernelInversion::talbot
                          ? tabulate_oscillator_kernel(nu, grid, options.talbot_nodes, c.workers)
                          : tabulate_oscillator_kernel_resolvent(nu, grid);
  std::ostringstream text;
  write_kernel_components_csv(text, kernel);
  out.save_text("oscillator_kernel.csv", text.str());
}

// ---- plot script -----------------------------------------------------------

std::vector<std::string> split_header(const fs::path& path, std::size_t& data_rows) {
  std::ifstream in(path);
  if (!in) throw ConfigError("plot: cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> cols;
  std::stringstream ss(line);
  for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
  data_rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++data_rows;
  return cols;
}

std::size_t distinct_values(const fs::path& path, std::size_t column) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) std::getline(ss, cell, ',');
    seen.insert(cell);
  }
  return seen.size();
}

std::string quoted(const fs::path& p) {
  std::string s = p.generic_string();
  std::string r = "'";
  for (char ch : s) r += ch == '\'' ? std::string("''") : std::string(1, ch);
  return r + "'";
}

}  // namespace

// ---- public API ------------------------------------------------------------

ProblemKind parse_problem_kind(const std::string& s) {
  if (s == "tartar") return ProblemKind::tartar;
  if (s == "ode") return ProblemKind::ode;
  if (s == "boltzmann") return ProblemKind::boltzmann;
  if (s == "transport") return ProblemKind::transport;
  if (s == "oscillator") return ProblemKind::oscillator;
  throw ConfigError("experiment.kind: unknown problem kind '" + s +
                    "' (expected tartar, ode, boltzmann, transport or oscillator)");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::tartar: return "tartar";
    case ProblemKind::ode: return "ode";
    case ProblemKind::boltzmann: return "boltzmann";
    case ProblemKind::transport: return "transport";
    case ProblemKind::oscillator: return "oscillator";
  }
  return "?";
}

ExperimentConfig default_config(ProblemKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (const char* env = std::getenv("HOMOKIN_OUT"); env && *env) c.output_dir = env;
  switch (kind) {
    case ProblemKind::tartar:
      c.preset = "sine";
      c.grid.n_cell = 4096;
      break;
    case ProblemKind::ode:
      c.preset = "example-1";
      c.grid.n_cell = 128;
      c.grid.time_steps = 10000;
      c.grid.points_per_period = 128;
      c.epsilons = inverse_sweep({10, 20, 40, 80, 160});
      break;
    case ProblemKind::boltzmann:
      c.preset = "1";
      c.epsilons = inverse_sweep({10, 20, 40, 80, 160});
      break;
    case ProblemKind::transport:
      c.preset = "transport-subcritical-1";
      c.grid.n_energy = 32;
      c.grid.n_cell = 128;
      c.grid.T = 1.0;
      c.grid.time_steps = 100;
      c.grid.points_per_period = 32;
      c.epsilons = inverse_sweep({8, 16, 32});
      break;
    case ProblemKind::oscillator:
      c.preset = "two-atom";
      c.grid.time_steps = 2000;
      break;
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.epsilons.empty() && is_sweep_kind(c.kind)) throw ConfigError("sweep.epsilons: empty list");
  for (double e : c.epsilons)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("sweep.epsilons: " + format_number(e) + " is outside (0, 1]");
  if (!strictly_decreasing(c.epsilons)) throw ConfigError("sweep.epsilons: values must be strictly decreasing");
  if (c.workers < 1) throw ConfigError("experiment.workers: must be at least 1");
  if (c.modes < 1 || c.modes > 16) throw ConfigError("experiment.modes: must lie in [1, 16]");
  if (c.output_dir.empty()) throw ConfigError("experiment.output: empty path");
  const auto positive = [](std::size_t v, const char* field) {
    if (v == 0) throw ConfigError(std::string(field) + ": must be positive");
  };
  positive(c.grid.n_cell, "grid.n_cell");
  positive(c.grid.n_energy, "grid.n_energy");
  positive(c.grid.n_omega, "grid.n_omega");
  positive(c.grid.n_r, "grid.n_r");
  positive(c.grid.time_steps, "grid.time_steps");
  if (!(c.grid.T > 0.0)) throw ConfigError("grid.T: must be positive");
  if (!(c.grid.points_per_period >= 1.0)) throw ConfigError("grid.points_per_period: must be at least 1");
  check_preset(c);
}

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> eps;
  if (trim(text).empty()) return eps;
  std::stringstream ss(text);
  for (std::string token; std::getline(ss, token, ',');) {
    token = trim(token);
    const auto slash = token.find('/');
    if (slash == std::string::npos) {
      eps.push_back(parse_double("sweep.epsilons", token));
    } else {
      const double num = parse_double("sweep.epsilons", token.substr(0, slash));
      const double den = parse_double("sweep.epsilons", token.substr(slash + 1));
      if (den == 0.0) throw ConfigError("sweep.epsilons: zero denominator in '" + token + "'");
      eps.push_back(num / den);
    }
  }
  return eps;
}

ExperimentConfig load_config(const fs::path& path, std::optional<ProblemKind> expected) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }

  std::optional<ProblemKind> kind = expected;
  if (const auto k = tree.get_optional<std::string>("experiment.kind")) {
    const auto file_kind = parse_problem_kind(trim(*k));
    if (expected && *expected != file_kind)
      throw ConfigError("experiment.kind: file says " + to_string(file_kind) + " but the command runs " +
                        to_string(*expected));
    kind = file_kind;
  }
  if (!kind) throw ConfigError("experiment.kind: missing");

  ExperimentConfig c = default_config(*kind);
  c.source = path;
  const auto size_value = [](const std::string& field, const std::string& v) {
    return static_cast<std::size_t>(parse_unsigned(field, v));
  };
  std::optional<double> dt;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section + ": expected a [section], got a bare key");
    for (const auto& [key, node] : body) {
      const auto field = section + "." + key;
      const auto v = node.get_value<std::string>();
      if (field == "experiment.kind") continue;
      if (field == "experiment.preset") c.preset = trim(v);
      else if (field == "experiment.placement") {
        try {
          c.placement = parse_placement(trim(v));
        } catch (const Error&) {
          throw ConfigError(field + ": expected inside or outside, got '" + v + "'");
        }
      } else if (field == "experiment.output") c.output_dir = trim(v);
      else if (field == "experiment.seed") c.seed = parse_unsigned(field, v);
      else if (field == "experiment.workers") c.workers = size_value(field, v);
      else if (field == "experiment.modes") c.modes = static_cast<int>(std::min<std::uint64_t>(parse_unsigned(field, v), 1000));
      else if (field == "sweep.epsilons") c.epsilons = parse_eps_list(v);
      else if (field == "grid.n_cell") c.grid.n_cell = size_value(field, v);
      else if (field == "grid.n_energy") c.grid.n_energy = size_value(field, v);
      else if (field == "grid.n_omega") c.grid.n_omega = size_value(field, v);
      else if (field == "grid.n_r") c.grid.n_r = size_value(field, v);
      else if (field == "grid.T") c.grid.T = parse_double(field, v);
      else if (field == "grid.time_steps") c.grid.time_steps = size_value(field, v);
      else if (field == "grid.dt") dt = parse_double(field, v);
      else if (field == "grid.points_per_period") c.grid.points_per_period = parse_double(field, v);
      else throw ConfigError(field + ": unknown key");
    }
  }
  if (dt) {
    if (tree.get_optional<std::string>("grid.time_steps"))
      throw ConfigError("grid.dt: give either dt or time_steps, not both");
    if (!(*dt > 0.0)) throw ConfigError("grid.dt: must be positive");
    c.grid.time_steps = static_cast<std::size_t>(std::llround(c.grid.T / *dt));
    if (c.grid.time_steps == 0 || std::abs(static_cast<double>(c.grid.time_steps) * *dt - c.grid.T) > 1e-9 * c.grid.T)
      throw ConfigError("grid.dt: must divide grid.T");
  }
  return c;
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  try {
    validate(config);
    Outputs out(config, result);
    switch (config.kind) {
      case ProblemKind::tartar: run_tartar(config, out); break;
      case ProblemKind::ode: run_ode(config, out); break;
      case ProblemKind::boltzmann: run_boltzmann(config, out); break;
      case ProblemKind::transport: run_transport(config, out); break;
      case ProblemKind::oscillator: run_oscillator(config, out); break;
    }
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    write_manifest(config, result, wall.count());
  } catch (const ConfigError& e) {
    result.status = exit_config_error;
    result.message = std::string("invalid configuration: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    result.status = exit_io_error;
    result.message = std::string("output error: ") + e.what();
  } catch (const std::exception& e) {
    result.status = exit_numerical_error;
    result.message = to_string(config.kind) + " (preset " + config.preset + "): " + e.what();
  }
  return result;
}

RunResult dump_kernel(const ExperimentConfig& config) {
  RunResult result;
  try {
    if (config.workers < 1) throw ConfigError("experiment.workers: must be at least 1");
    if (config.grid.time_steps == 0 || !(config.grid.T > 0.0))
      throw ConfigError("grid.time_steps: need a positive time grid");
    const auto sigma = tartar_sigma(config.preset, config.grid.n_cell);
    const auto table = tabulate_memory_kernel(sigma, TimeGrid(config.grid.T, config.grid.time_steps));
    Outputs out(config, result);
    std::ostringstream text;
    write_kernel_csv(text, table);
    out.save_text("kernel.csv", text.str());
  } catch (const ConfigError& e) {
    result.status = exit_config_error;
    result.message = std::string("invalid configuration: ") + e.what();
  } catch (const fs::filesystem_error& e) {
    result.status = exit_io_error;
    result.message = std::string("output error: ") + e.what();
  } catch (const std::exception& e) {
    result.status = exit_numerical_error;
    result.message = "kernel-dump (preset " + config.preset + "): " + e.what();
  }
  return result;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fs::filesystem_error("cannot read", path, std::make_error_code(std::errc::no_such_file_or_directory));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: digest init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

void emit_plot_script(const std::vector<fs::path>& csvs, const fs::path& script, const fs::path& image) {
  if (csvs.empty()) throw ConfigError("plot: no CSV files given");
  for (const auto& p : csvs)
    if (!fs::is_regular_file(p)) throw ConfigError("plot: missing file " + p.string());

  const auto base = fs::absolute(script).parent_path();
  const auto rel = [&](const fs::path& p) { return fs::absolute(p).lexically_relative(base); };

  std::vector<std::string> panels;
  for (const auto& p : csvs) {
    std::size_t rows = 0;
    const auto cols = split_header(p, rows);
    std::ostringstream s;
    const auto file = quoted(rel(p));
    if (cols == std::vector<std::string>{"epsilon", "k", "e_k"}) {
      const std::size_t modes = distinct_values(p, 1);
      s << "set title '(a) Convergence rate'\nset logscale xy\nset xlabel 'epsilon'\nset ylabel 'e_k'\n"
        << "set key outside right\nplot \\\n";
      for (std::size_t k = 0; k < modes; ++k)
        s << "  " << file << " skip 1 every " << modes << "::" << k << " using 1:3 with linespoints title 'k = " << k
          << "'" << (k + 1 < modes ? ", \\\n" : "\n");
      s << "unset logscale\n";
    } else if (cols == std::vector<std::string>{"epsilon", "norm_diff"}) {
      s << "set title '(b) Norm difference'\nset xlabel 'epsilon'\nset ylabel 'norm difference'\nunset key\n"
        << "plot " << file << " skip 1 using 1:2 with linespoints\n";
    } else {
      if (cols.size() < 2) throw ConfigError("plot: " + p.string() + " has fewer than two columns");
      s << "set title " << quoted(p.filename()) << "\nset xlabel '" << cols[0] << "'\nset ylabel ''\nset key\nplot \\\n";
      for (std::size_t j = 1; j < cols.size(); ++j)
        s << "  " << file << " skip 1 using 1:" << j + 1 << " with lines title '" << cols[j] << "'"
          << (j + 1 < cols.size() ? ", \\\n" : "\n");
    }
    panels.push_back(s.str());
  }

  std::ostringstream out;
  out << "set terminal pngcairo size " << 600 * panels.size() << ",450\n"
      << "set output " << quoted(image) << "\n"
      << "set datafile separator ','\n";
  if (panels.size() > 1) out << "set multiplot layout 1," << panels.size() << "\n";
  for (const auto& panel : panels) out << panel;
  if (panels.size() > 1) out << "unset multiplot\n";

  std::ofstream file(script, std::ios::binary);
  file << out.str();
  if (!file) throw ConfigError("plot: cannot write " + script.string());
}

}  // namespace homokin
