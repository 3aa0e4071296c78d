#pragma once

#include <functional>
#include <string>

#include "homokin/fields.hpp"
#include "homokin/time_grid.hpp"

namespace homokin {

enum class Placement { inside, outside };
Placement parse_placement(const std::string& s);
std::string to_string(Placement p);

// 1-periodic profile; evaluated at the fractional part of its argument.
using Profile = std::function<double(double y)>;
double eval_periodic(const Profile& f, double y);

// d_t phi + w(E) sigma(E/eps) phi = w(E) int kappa(E'/eps) phi(E') dE'     (inside)
// d_t phi + w(E) sigma(E/eps) phi = w(E) kappa(E/eps) int phi(E') dE'      (outside)
// phi(0, E) = phi_in(E/eps); w = 1 unless rate_weight is set.
struct ToyProblem {
  Profile sigma;
  Profile kappa;
  Profile phi_in;
  Placement placement = Placement::inside;
  double T = 10.0;
  double epsilon = 0.1;
  double e_min = 0.0;
  double e_max = 1.0;
  std::size_t time_steps = 50;
  double points_per_period = 100.0;  // h = eps / points_per_period
  std::size_t node_budget = 2'000'000;
  std::function<double(double)> rate_weight;
};

struct EnergyGrid {
  double e_min = 0.0;
  double e_max = 1.0;
  std::size_t cells = 0;

  double h() const { return (e_max - e_min) / static_cast<double>(cells); }
  double node(std::size_t i) const { return e_min + (static_cast<double>(i) + 0.5) * h(); }
};

EnergyGrid energy_grid_for(const ToyProblem& problem);

EnergyField solve_toy_eps(const ToyProblem& problem);

struct TwoScaleOptions {
  std::size_t n_energy = 64;  // Gauss-Legendre nodes in E
  std::size_t n_cell = 256;   // midpoint nodes in y
};

// RK4 on the (E, y) tensor grid for the two-scale limit.
TwoScaleField solve_toy_two_scale(const ToyProblem& problem, const TimeGrid& grid, const TwoScaleOptions& options = {});

// id in {1, 2, 3}
ToyProblem example_preset(int id, Placement placement);

}  // namespace homokin
