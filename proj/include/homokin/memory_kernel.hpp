#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "homokin/cell_calculus.hpp"
#include "homokin/time_grid.hpp"

namespace homokin {

// K(tau) = <sigma e^{-tau s L_sigma} L_1 sigma> sampled on a uniform lag grid (s = rate_scale).
struct KernelTable {
  std::vector<double> taus;
  std::vector<double> values;
  CellFunction sigma_ref;
  double rate_scale = 1.0;

  double dt() const { return taus.size() > 1 ? taus[1] - taus[0] : 0.0; }
};

// Time-dependent cell data f(t, y).
using CellSource = std::function<CellFunction(double t)>;

struct SourceTable {
  std::vector<double> times;
  std::vector<double> values;
  CellSource f_ref;
  CellFunction u_in_ref;
};

enum class KernelTabulation {
  automatic,   // propagator for n <= 512, rk4 otherwise
  propagator,  // dense e^{-dt L}, O(n^2) per step
  rk4          // RK4 substeps, O(n) per step
};

double memory_kernel_eval(const CellFunction& sigma, double tau,
                          SemigroupMethod method = SemigroupMethod::matrix_exp);

KernelTable tabulate_memory_kernel(const CellFunction& sigma, const TimeGrid& grid,
                                   KernelTabulation method = KernelTabulation::automatic,
                                   double rate_scale = 1.0);

// S(t) = <f(t)> - int_0^t <sigma e^{-(t-s)L} L_1 f(s)> ds - <sigma e^{-tL} L_1 u_in>
SourceTable tabulate_homogenized_source(const CellFunction& sigma, const CellSource& f,
                                        const CellFunction& u_in, const TimeGrid& grid);

// Single value; the time integral uses the trapezoid rule with step at most dt.
double homogenized_source_eval(const CellFunction& sigma, const CellSource& f, const CellFunction& u_in,
                               double t, double dt = 1e-3);

CellSource zero_source(PeriodicGrid grid);

double kernel_laplace_semigroup(const CellFunction& sigma, double p);
double tartar_kernel_laplace(const CellFunction& sigma, double p);

struct LaplaceEstimate {
  double value = 0.0;
  double tail_bound = 0.0;  // sup|K| e^{-p tau_max}/p over the tabulated range
  double tau_max = 0.0;
};

// tau_max = max(20, 30/p); the table must reach tau_max.
double laplace_tau_max(double p);
LaplaceEstimate numeric_laplace(const KernelTable& table, double p);

struct TartarReport {
  std::vector<double> ps;
  std::vector<double> semigroup_route;  // K^(p)
  std::vector<double> tartar_route;     // M^(p)
  std::vector<double> numeric_route;    // trapezoid Laplace of a KernelTable
  std::vector<double> tail_bounds;
  std::vector<double> relative_errors;
  double max_relative_error = 0.0;
  double max_numeric_error = 0.0;  // absolute, numeric vs K^
};

struct TartarOptions {
  bool include_numeric = true;
  double dt = 5e-3;
};

TartarReport verify_tartar_equivalence(const CellFunction& sigma, const std::vector<double>& ps,
                                       const TartarOptions& options = {});

void write_kernel_csv(std::ostream& out, const KernelTable& table);

}  // namespace homokin
