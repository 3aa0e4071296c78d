#include "homokin/energy_boltzmann.hpp"

#include <cmath>
#include <numbers>

#include "homokin/errors.hpp"
#include "homokin/numerics.hpp"

namespace homokin {

Placement parse_placement(const std::string& s) {
  if (s == "inside") return Placement::inside;
  if (s == "outside") return Placement::outside;
  throw ConfigError("placement must be 'inside' or 'outside', got '" + s + "'");
}

std::string to_string(Placement p) { return p == Placement::inside ? "inside" : "outside"; }

double eval_periodic(const Profile& f, double y) { return f(y - std::floor(y)); }

EnergyField TwoScaleField::homogenized() const {
  EnergyField h{e_min, e_max, times, energies, weights, {}};
  h.values.assign(times.size(), std::vector<double>(energies.size()));
  for (std::size_t t = 0; t < times.size(); ++t)
    for (std::size_t i = 0; i < energies.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_cell; ++j) s += at(t, i, j);
      h.values[t][i] = s / static_cast<double>(n_cell);
    }
  return h;
}

namespace {

void validate(const ToyProblem& p) {
  if (!p.sigma || !p.kappa || !p.phi_in) throw PreconditionError("ToyProblem: sigma, kappa and phi_in must be set");
  if (!(p.T > 0.0)) throw DomainError("ToyProblem: T must be positive");
  if (!(p.e_max > p.e_min) || p.e_min < 0.0) throw DomainError("ToyProblem: need 0 <= e_min < e_max");
  if (p.time_steps == 0) throw DomainError("ToyProblem: time_steps must be positive");
}

// Classical RK4 for y' = f(y) with fixed step; stores every step.
template <class Rhs>
std::vector<std::vector<double>> rk4(std::vector<double> y, double dt, std::size_t steps, Rhs&& rhs) {
  const std::size_t n = y.size();
  std::vector<std::vector<double>> out;
  out.reserve(steps + 1);
  out.push_back(y);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t s = 0; s < steps; ++s) {
    rhs(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    out.push_back(y);
  }
  return out;
}

}  // namespace

EnergyGrid energy_grid_for(const ToyProblem& problem) {
  if (!(problem.epsilon > 0.0) || problem.epsilon > 1.0) throw DomainError("ToyProblem: epsilon must lie in (0, 1]");
  if (!(problem.points_per_period > 0.0)) throw DomainError("ToyProblem: points_per_period must be positive");
  const double cells = (problem.e_max - problem.e_min) / problem.epsilon * problem.points_per_period;
  if (cells > static_cast<double>(problem.node_budget))
    throw DomainError("ToyProblem: energy mesh of " + std::to_string(static_cast<long long>(cells)) +
                      " nodes exceeds the node budget " + std::to_string(problem.node_budget));
  return {problem.e_min, problem.e_max, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cells)))};
}

EnergyField solve_toy_eps(const ToyProblem& p) {
  validate(p);
  const auto grid = energy_grid_for(p);
  const std::size_t n = grid.cells;
  const double h = grid.h();
  std::vector<double> e(n), sig(n), kap(n), rate(n), init(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = grid.node(i);
    const double y = e[i] / p.epsilon;
    rate[i] = p.rate_weight ? p.rate_weight(e[i]) : 1.0;
    sig[i] = eval_periodic(p.sigma, y);
    kap[i] = eval_periodic(p.kappa, y);
    init[i] = eval_periodic(p.phi_in, y);
    if (!(sig[i] > 0.0)) throw DomainError("ToyProblem: sigma must be positive");
    if (kap[i] < 0.0) throw DomainError("ToyProblem: kappa must be nonnegative");
  }

  auto rhs = [&](const std::vector<double>& phi, std::vector<double>& d) {
    double integral = 0.0;
    if (p.placement == Placement::inside)
      for (std::size_t i = 0; i < n; ++i) integral += kap[i] * phi[i];
    else
      for (std::size_t i = 0; i < n; ++i) integral += phi[i];
    integral *= h;
    for (std::size_t i = 0; i < n; ++i) {
      const double gain = p.placement == Placement::inside ? integral : kap[i] * integral;
      d[i] = rate[i] * (gain - sig[i] * phi[i]);
    }
  };

  const double dt = p.T / static_cast<double>(p.time_steps);
  EnergyField out{p.e_min, p.e_max, {}, e, std::vector<double>(n, h), rk4(init, dt, p.time_steps, rhs)};
  for (std::size_t s = 0; s <= p.time_steps; ++s) out.times.push_back(static_cast<double>(s) * dt);
  return out;
}

TwoScaleField solve_toy_two_scale(const ToyProblem& p, const TimeGrid& grid, const TwoScaleOptions& options) {
  validate(p);
  if (options.n_energy == 0 || options.n_cell == 0) throw DomainError("two-scale grid sizes must be positive");
  const auto gauss = gauss_legendre(options.n_energy, p.e_min, p.e_max);
  const std::size_t ne = options.n_energy, ny = options.n_cell;
  std::vector<double> sig(ny), kap(ny), init(ne * ny), rate(ne);
  for (std::size_t j = 0; j < ny; ++j) {
    const double y = (static_cast<double>(j) + 0.5) / static_cast<double>(ny);
    sig[j] = eval_periodic(p.sigma, y);
    kap[j] = eval_periodic(p.kappa, y);
    if (!(sig[j] > 0.0)) throw DomainError("ToyProblem: sigma must be positive");
    if (kap[j] < 0.0) throw DomainError("ToyProblem: kappa must be nonnegative");
  }
  for (std::size_t i = 0; i < ne; ++i) {
    rate[i] = p.rate_weight ? p.rate_weight(gauss.nodes[i]) : 1.0;
    for (std::size_t j = 0; j < ny; ++j)
      init[i * ny + j] = eval_periodic(p.phi_in, (static_cast<double>(j) + 0.5) / static_cast<double>(ny));
  }

  auto rhs = [&](const std::vector<double>& phi, std::vector<double>& d) {
    // int int kappa(y') phi(E', y') dE' dy'  (inside) or int int phi dE' dy' (outside)
    double integral = 0.0;
    for (std::size_t i = 0; i < ne; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < ny; ++j) s += (p.placement == Placement::inside ? kap[j] : 1.0) * phi[i * ny + j];
      integral += gauss.weights[i] * s;
    }
    integral /= static_cast<double>(ny);
    for (std::size_t i = 0; i < ne; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        const double gain = p.placement == Placement::inside ? integral : kap[j] * integral;
        d[i * ny + j] = rate[i] * (gain - sig[j] * phi[i * ny + j]);
      }
  };

  TwoScaleField out;
  out.e_min = p.e_min;
  out.e_max = p.e_max;
  out.energies = gauss.nodes;
  out.weights = gauss.weights;
  out.n_cell = ny;
  out.values = rk4(init, grid.dt(), grid.count(), rhs);
  for (std::size_t s = 0; s <= grid.count(); ++s) out.times.push_back(grid.time(s));
  return out;
}

ToyProblem example_preset(int id, Placement placement) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ToyProblem p;
  p.placement = placement;
  switch (id) {
    case 1:
      p.sigma = [=](double y) { return 2.0 + 0.5 * std::sin(two_pi * y); };
      p.kappa = [=](double y) { return 1.0 + 0.5 * std::sin(two_pi * y); };
      p.phi_in = [=](double y) { return 1.0 + std::sin(two_pi * y); };
      break;
    case 2:
      p.sigma = [=](double y) { return 2.0 + 0.5 * std::sin(two_pi * y); };
      p.kappa = [=](double y) { return 1.0 + 0.5 * std::sin(two_pi * y); };
      p.phi_in = [](double y) { return y <= 0.5 ? 2.0 : 1.0; };
      break;
    case 3:
      p.sigma = [=](double y) { return std::sin(two_pi * y) >= 0.0 ? 2.5 : 2.0; };
      p.kappa = [=](double y) { return std::sin(two_pi * y) >= 0.0 ? 1.5 : 1.0; };
      p.phi_in = [=](double y) { return 1.0 + std::sin(two_pi * y); };
      break;
    default:
      throw ConfigError("unknown example preset " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
  return p;
}

}  // namespace homokin
