#include "homokin/multiscale_ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homokin/errors.hpp"
#include "homokin/numerics.hpp"
#include "homokin/parallel.hpp"
#include "homokin/volterra.hpp"

namespace homokin {

CellFunction OdeProblem::sigma_at(double x) const {
  return CellFunction::sample(cell, [&](double y) { return sigma(x, y); });
}

CellFunction OdeProblem::u_in_at(double x) const {
  return CellFunction::sample(cell, [&](double y) { return u_in(x, y); });
}

CellFunction OdeProblem::f_at(double t, double x) const {
  if (!f) return CellFunction::constant(cell, 0.0);
  return CellFunction::sample(cell, [&](double y) { return f(t, x, y); });
}

CellSource OdeProblem::source_at(double x) const {
  OdeProblem copy = *this;
  return [copy, x](double t) { return copy.f_at(t, x); };
}

void OdeProblem::validate(double x) const {
  if (!sigma || !u_in) throw PreconditionError("OdeProblem: sigma and u_in must be set");
  if (!(T > 0.0)) throw DomainError("OdeProblem: T must be positive");
  if (!(sigma_at(x).min() > 0.0)) throw DomainError("OdeProblem: sigma must be positive on the cell grid");
}

OdeEpsSolution solve_eps_exact(const OdeProblem& problem, const std::vector<double>& x_nodes, std::size_t steps,
                               std::size_t output_every) {
  if (!(problem.epsilon > 0.0)) throw DomainError("solve_eps_exact: epsilon must be positive");
  if (steps == 0 || output_every == 0) throw DomainError("solve_eps_exact: steps must be positive");
  const double dt = problem.T / static_cast<double>(steps);
  OdeEpsSolution out;
  out.x = x_nodes;
  for (std::size_t k = 0; k <= steps; k += output_every) out.times.push_back(static_cast<double>(k) * dt);
  out.values.assign(out.times.size(), std::vector<double>(x_nodes.size()));

  for (std::size_t i = 0; i < x_nodes.size(); ++i) {
    const double x = x_nodes[i];
    const double y = x / problem.epsilon;
    const auto sig = problem.sigma_at(x);
    const double s = periodic_interpolate(sig.values(), y);
    if (!(s > 0.0)) throw DomainError("solve_eps_exact: sigma must be positive");
    const double u0 = periodic_interpolate(problem.u_in_at(x).values(), y);
    auto f_eps = [&](double t) {
      return problem.has_source() ? periodic_interpolate(problem.f_at(t, x).values(), y) : 0.0;
    };
    // u(t) = u_in e^{-s t} + int_0^t e^{-s(t-r)} f(r) dr, trapezoid in r
    double integral = 0.0;
    double f_prev = f_eps(0.0);
    const double decay = std::exp(-s * dt);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (k > 0) {
        const double f_now = problem.has_source() ? f_eps(t) : 0.0;
        integral = decay * (integral + 0.5 * dt * f_prev) + 0.5 * dt * f_now;
        f_prev = f_now;
      }
      if (k % output_every == 0) out.values[k / output_every][i] = u0 * std::exp(-s * t) + integral;
    }
  }
  return out;
}

TwoScaleSolution solve_two_scale_closed(const OdeProblem& problem, const TimeGrid& grid, double x) {
  problem.validate(x);
  const auto sig = problem.sigma_at(x);
  const auto uin = problem.u_in_at(x);
  const std::size_t n = sig.size();
  const double dt = grid.dt();
  std::vector<ExpWeights> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = exp_weights(sig[j], dt);

  TwoScaleSolution out;
  out.times.resize(grid.points());
  out.u0.assign(grid.points(), std::vector<double>(n));
  out.u_hom.resize(grid.points());
  std::vector<double> u(uin.values().begin(), uin.values().end());
  auto f_prev = problem.f_at(0.0, x);
  for (std::size_t k = 0; k <= grid.count(); ++k) {
    const double t = grid.time(k);
    if (k > 0) {
      // exact for sources linear on each step
      const auto f_now = problem.f_at(t, x);
      for (std::size_t j = 0; j < n; ++j) u[j] = w[j].decay * u[j] + w[j].w0 * f_prev[j] + w[j].w1 * f_now[j];
      f_prev = f_now;
    }
    out.times[k] = t;
    out.u0[k] = u;
    out.u_hom[k] = cell_average(u);
  }
  return out;
}

HomogenizedSeries solve_coupled_system(const OdeProblem& problem, const TimeGrid& grid, double x) {
  problem.validate(x);
  const auto sig = problem.sigma_at(x);
  const std::size_t n = sig.size();
  const double sbar = cell_average(sig);
  const auto l1s = fluctuation(sig);
  const CellOperator op(sig);
  const double dt = grid.dt();

  // state: [u_hom, r_0..r_{n-1}]
  std::vector<double> state(n + 1);
  state[0] = cell_average(problem.u_in_at(x));
  const auto r0 = fluctuation(problem.u_in_at(x));
  std::copy(r0.values().begin(), r0.values().end(), state.begin() + 1);

  std::vector<double> lr(n);
  auto rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
    const auto f = problem.f_at(t, x);
    const double fbar = cell_average(f);
    std::span<const double> r(s.data() + 1, n);
    double sr = 0.0;
    for (std::size_t j = 0; j < n; ++j) sr += sig[j] * r[j];
    ds[0] = fbar - sbar * s[0] - sr / static_cast<double>(n);
    op.apply(r, lr);
    for (std::size_t j = 0; j < n; ++j) ds[j + 1] = -lr[j] - s[0] * l1s[j] + (f[j] - fbar);
  };

  HomogenizedSeries out;
  out.times.resize(grid.points());
  out.u_hom.resize(grid.points());
  std::vector<double> k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), tmp(n + 1);
  auto record = [&](std::size_t k) {
    out.times[k] = grid.time(k);
    out.u_hom[k] = state[0];
    out.max_mean_r = std::max(out.max_mean_r, std::abs(cell_average(std::span<const double>(state.data() + 1, n))));
  };
  record(0);
  for (std::size_t k = 0; k < grid.count(); ++k) {
    const double t = grid.time(k);
    rhs(t, state, k1);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = state[j] + 0.5 * dt * k1[j];
    rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = state[j] + 0.5 * dt * k2[j];
    rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t j = 0; j <= n; ++j) tmp[j] = state[j] + dt * k3[j];
    rhs(t + dt, tmp, k4);
    for (std::size_t j = 0; j <= n; ++j) state[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    record(k + 1);
  }
  return out;
}

HomogenizedSeries solve_homogenized_volterra(const OdeProblem& problem, const TimeGrid& grid, double x) {
  problem.validate(x);
  const auto sig = problem.sigma_at(x);
  const auto uin = problem.u_in_at(x);
  const auto kernel = tabulate_memory_kernel(sig, grid);
  const auto source = tabulate_homogenized_source(sig, problem.source_at(x), uin, grid);
  const auto vp = scalar_problem(cell_average(sig), kernel.values, source.values, cell_average(uin));
  const auto sol = solve_volterra(vp, grid);
  HomogenizedSeries out;
  out.times = sol.times;
  out.u_hom = scalar_values(sol);
  return out;
}

double sup_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("sup_difference: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<WeakTestFunction> default_test_functions() {
  return {
      {"constant", [](double) { return 1.0; }},
      {"sin", [](double x) { return std::sin(2.0 * std::numbers::pi * x); }},
      {"hat", [](double x) { return std::max(0.0, 1.0 - std::abs(4.0 * (x - 0.5))); }},
  };
}

std::vector<WeakErrorRow> weak_convergence_study(const OdeProblem& problem, const std::vector<double>& epsilons,
                                                 const std::vector<WeakTestFunction>& tests,
                                                 std::size_t points_per_period, std::size_t workers) {
  if (points_per_period == 0) points_per_period = std::max<std::size_t>(50, problem.cell.size());
  if (points_per_period < 50) throw DomainError("weak_convergence_study: need at least 50 points per period");
  const std::size_t steps = 5000;

  // Limit side: u_hom(T, x) is smooth in x, so a composite Gauss rule in x
  // (panels split at the quarter points, where the hat has kinks) suffices.
  GaussRule gauss;
  for (int panel = 0; panel < 4; ++panel) {
    const auto g = gauss_legendre(16, 0.25 * panel, 0.25 * (panel + 1));
    gauss.nodes.insert(gauss.nodes.end(), g.nodes.begin(), g.nodes.end());
    gauss.weights.insert(gauss.weights.end(), g.weights.begin(), g.weights.end());
  }
  std::vector<double> hom_at(gauss.nodes.size());
  parallel_for(gauss.nodes.size(), workers, [&](std::size_t i) {
    const auto two = solve_two_scale_closed(problem, TimeGrid(problem.T, steps), gauss.nodes[i]);
    hom_at[i] = two.u_hom.back();
  });
  std::vector<double> hom_moment(tests.size(), 0.0);
  for (std::size_t m = 0; m < tests.size(); ++m)
    for (std::size_t i = 0; i < gauss.nodes.size(); ++i)
      hom_moment[m] += gauss.weights[i] * hom_at[i] * tests[m].psi(gauss.nodes[i]);

  std::vector<std::vector<WeakErrorRow>> rows(epsilons.size());
  parallel_for(epsilons.size(), workers, [&](std::size_t e) {
    OdeProblem p = problem;
    p.epsilon = epsilons[e];
    if (!(p.epsilon > 0.0)) throw DomainError("weak_convergence_study: epsilon must be positive");
    const auto nx = static_cast<std::size_t>(std::llround(points_per_period / p.epsilon));
    std::vector<double> x(nx);
    for (std::size_t i = 0; i < nx; ++i) x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(nx);
    const auto sol = solve_eps_exact(p, x, steps, steps);
    const auto& u = sol.values.back();
    for (std::size_t m = 0; m < tests.size(); ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < nx; ++i) s += u[i] * tests[m].psi(x[i]);
      s /= static_cast<double>(nx);
      rows[e].push_back({p.epsilon, tests[m].name, std::abs(s - hom_moment[m])});
    }
  });
  std::vector<WeakErrorRow> flat;
  for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

}  // namespace homokin
