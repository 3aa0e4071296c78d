#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "homokin/time_grid.hpp"

namespace homokin {

// du/dt + a u - int_0^t K(t-s) u(s) ds = S(t), u(0) = u0.
// Dim = 1 (scalar) or 2 (2x2 systems).
template <int Dim>
struct VolterraProblem {
  using Matrix = Eigen::Matrix<double, Dim, Dim>;
  using Vector = Eigen::Matrix<double, Dim, 1>;

  Matrix decay = Matrix::Zero();
  // K(j dt), j = 0..; at least grid.count()+1 entries, or empty for K = 0.
  std::vector<Matrix> kernel;
  // S(t_n), n = 0..count, or empty for S = 0.
  std::vector<Vector> source;
  Vector u0 = Vector::Zero();
};

template <int Dim>
struct VolterraSolution {
  std::vector<double> times;
  std::vector<typename VolterraProblem<Dim>::Vector> values;
};

using ScalarVolterra = VolterraProblem<1>;
using MatrixVolterra = VolterraProblem<2>;

// Product trapezoid: history by the trapezoid rule, local term implicit.
template <int Dim>
VolterraSolution<Dim> solve_volterra(const VolterraProblem<Dim>& problem, const TimeGrid& grid);

// Max norm of the discrete residual (centered differences in the interior,
// one-sided second order at the ends).
template <int Dim>
double volterra_residual(const VolterraProblem<Dim>& problem,
                         const std::vector<typename VolterraProblem<Dim>::Vector>& u, const TimeGrid& grid);

// Scalar convenience wrappers.
ScalarVolterra scalar_problem(double a, const std::vector<double>& kernel, const std::vector<double>& source,
                              double u0);
std::vector<double> scalar_values(const VolterraSolution<1>& solution);

template <int Dim>
void write_solution_csv(std::ostream& out, const VolterraSolution<Dim>& solution);

}  // namespace homokin
