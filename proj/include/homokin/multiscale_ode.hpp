#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homokin/cell_calculus.hpp"
#include "homokin/memory_kernel.hpp"
#include "homokin/time_grid.hpp"

namespace homokin {

using CellField = std::function<double(double x, double y)>;
using SourceField = std::function<double(double t, double x, double y)>;

// du/dt + sigma(x, x/eps) u = f(t, x, x/eps), u(0) = u_in(x, x/eps); all fields 1-periodic in y.
struct OdeProblem {
  CellField sigma;
  SourceField f;  // empty means f = 0
  CellField u_in;
  double T = 10.0;
  double epsilon = 0.1;
  PeriodicGrid cell{256};

  CellFunction sigma_at(double x) const;
  CellFunction u_in_at(double x) const;
  CellFunction f_at(double t, double x) const;
  CellSource source_at(double x) const;
  bool has_source() const { return static_cast<bool>(f); }
  // Throws DomainError unless sigma > 0 on the cell grid at x.
  void validate(double x) const;
};

struct HomogenizedSeries {
  std::vector<double> times;
  std::vector<double> u_hom;
  double max_mean_r = 0.0;  // coupled route only: max_t |<r(t)>|
};

struct TwoScaleSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> u0;  // [t][y]
  std::vector<double> u_hom;
};

struct OdeEpsSolution {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<std::vector<double>> values;  // [t][x]
};

// Closed form per x-node with periodic linear interpolation of the cell data
// at y = x/eps; time integral by the trapezoid rule with `steps` steps. Only
// every `output_every`-th step is stored.
OdeEpsSolution solve_eps_exact(const OdeProblem& problem, const std::vector<double>& x_nodes,
                               std::size_t steps = 5000, std::size_t output_every = 1);

TwoScaleSolution solve_two_scale_closed(const OdeProblem& problem, const TimeGrid& grid, double x = 0.0);
HomogenizedSeries solve_coupled_system(const OdeProblem& problem, const TimeGrid& grid, double x = 0.0);
HomogenizedSeries solve_homogenized_volterra(const OdeProblem& problem, const TimeGrid& grid, double x = 0.0);

double sup_difference(const std::vector<double>& a, const std::vector<double>& b);

struct WeakTestFunction {
  std::string name;
  std::function<double(double)> psi;
};
// constant, sin(2 pi x), hat centred at 1/2
std::vector<WeakTestFunction> default_test_functions();

struct WeakErrorRow {
  double epsilon;
  std::string test_fn;
  double weak_error;
};

// |int_0^1 (u^eps(T,x) - u_hom(T,x)) psi(x) dx| on a midpoint x-grid with
// points_per_period nodes per eps-period; u_hom(T,x) from the closed two-scale route.
std::vector<WeakErrorRow> weak_convergence_study(const OdeProblem& problem, const std::vector<double>& epsilons,
                                                 const std::vector<WeakTestFunction>& tests,
                                                 std::size_t points_per_period = 0, std::size_t workers = 1);

}  // namespace homokin
