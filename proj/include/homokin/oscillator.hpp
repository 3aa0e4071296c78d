#pragma once

#include <complex>
#include <functional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "homokin/time_grid.hpp"
#include "homokin/volterra.hpp"

namespace homokin {

// Finite atomic probability measure: the value distribution of b.
class YoungMeasure {
 public:
  YoungMeasure(std::vector<double> atoms, std::vector<double> weights);
  // Atoms b(y_j) on the midpoint cell grid with equal weights.
  static YoungMeasure from_periodic(const std::function<double(double)>& b, std::size_t n);
  static YoungMeasure point_mass(double b);

  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  double mean() const;
  double variance() const;
  double max_abs_atom() const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

// A = [[0, 1], [-1, 0]]
Eigen::Matrix2d skew_A();
// R(theta) = e^{theta A} = [[cos, sin], [-sin, cos]]
Eigen::Matrix2d rotation(double theta);

Eigen::Vector2d exact_rotation(double b, double t, const Eigen::Vector2d& u_in);
Eigen::Vector2d cell_averaged_limit(const YoungMeasure& nu, double t, const Eigen::Vector2d& u_in);

// Inverse of M(p) = sum_i w_i (p I - lambda_i A)^{-1}.
Eigen::Matrix2d matrix_B(const YoungMeasure& nu, double p);
Eigen::Matrix2d matrix_M(const YoungMeasure& nu, double p);

// B(p) - p I + b* A, evaluated through its two eigen-branches A -> +-i so that
// nothing cancels at large |p|. Valid for complex p off the imaginary axis.
Eigen::Matrix2cd regularized_kernel_laplace(const YoungMeasure& nu, std::complex<double> p);
Eigen::Matrix2d regularized_kernel_laplace(const YoungMeasure& nu, double p);

using LaplaceMatrixFn = std::function<Eigen::Matrix2cd(std::complex<double>)>;
using LaplaceScalarFn = std::function<std::complex<double>(std::complex<double>)>;

// Fixed Talbot contour, scale r = max(2 nodes / (5 t), min_scale). min_scale
// must exceed the modulus of the singularities on the imaginary axis divided by pi.
Eigen::Matrix2d inverse_laplace_talbot(const LaplaceMatrixFn& f, double t, int nodes = 32, double min_scale = 0.0);
double inverse_laplace_talbot(const LaplaceScalarFn& f, double t, int nodes = 32, double min_scale = 0.0);

// min_scale used for K~ of a measure: 0.65 max |lambda|.
double talbot_min_scale(const YoungMeasure& nu);

struct KernelSeries {
  std::vector<double> times;
  std::vector<double> alpha;  // K~(t) = alpha I + beta A
  std::vector<double> beta;
};

// K~ on grid nodes; the t = 0 entry is the initial value Var(lambda) I.
KernelSeries tabulate_oscillator_kernel(const YoungMeasure& nu, const TimeGrid& grid, int nodes = 32,
                                        std::size_t workers = 1);

// Time-domain route: with m(t) = sum w R(lambda t), K~ solves the second-kind equation
// K~(t) = sum w lambda (lambda - b*) R(lambda t) - int_0^t K~(s) m'(t-s) ds (trapezoid).
// Unlike Talbot its accuracy does not degrade for large t.
KernelSeries tabulate_oscillator_kernel_resolvent(const YoungMeasure& nu, const TimeGrid& grid);

enum class KernelInversion { talbot, resolvent };

struct OscillatorOptions {
  int talbot_nodes = 32;
  std::size_t workers = 1;
  KernelInversion inversion = KernelInversion::talbot;
};

// dU/dt - b* A U = - int_0^t K~(t-s) U(s) ds, U(0) = u_in.
VolterraSolution<2> solve_oscillator_limit(const YoungMeasure& nu, const Eigen::Vector2d& u_in, const TimeGrid& grid,
                                           const OscillatorOptions& options = {});

// Trapezoid Laplace transform of a sampled series on [0, t_end] (no tail).
Eigen::Vector2d laplace_of_series(const std::vector<double>& times, const std::vector<Eigen::Vector2d>& values,
                                  double p);
// int_0^t_end e^{-p t} g(t) dt by composite Gauss-Legendre.
Eigen::Vector2d laplace_of_function(const std::function<Eigen::Vector2d(double)>& g, double p, double t_end,
                                    std::size_t panels = 400);

// Average over x in [a, b] of exact_rotation(b(x/eps), t, u_in), midpoint rule
// with points_per_period nodes per eps-period.
Eigen::Vector2d eps_rotation_average(const std::function<double(double)>& b, double eps, double t,
                                     const Eigen::Vector2d& u_in, double a, double c,
                                     std::size_t points_per_period = 200);

void write_kernel_components_csv(std::ostream& out, const KernelSeries& kernel);

}  // namespace homokin
