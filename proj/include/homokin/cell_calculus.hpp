#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace homokin {

// Midpoint grid on the unit cell: y_j = (j + 1/2)/n, w_j = 1/n.
class PeriodicGrid {
 public:
  explicit PeriodicGrid(std::size_t n);

  std::size_t size() const { return n_; }
  double node(std::size_t j) const { return (static_cast<double>(j) + 0.5) / static_cast<double>(n_); }
  double weight() const { return 1.0 / static_cast<double>(n_); }
  std::vector<double> nodes() const;

  bool operator==(const PeriodicGrid&) const = default;

 private:
  std::size_t n_;
};

class CellFunction {
 public:
  CellFunction(PeriodicGrid grid, std::vector<double> values);

  static CellFunction sample(PeriodicGrid grid, const std::function<double(double)>& f);
  static CellFunction constant(PeriodicGrid grid, double c);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }
  Eigen::Map<const Eigen::VectorXd> vector() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

  double min() const;
  double max() const;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

CellFunction operator+(const CellFunction& a, const CellFunction& b);
CellFunction operator-(const CellFunction& a, const CellFunction& b);
CellFunction operator*(const CellFunction& a, const CellFunction& b);
CellFunction operator*(double s, const CellFunction& a);
CellFunction operator+(const CellFunction& a, double c);

double cell_average(const CellFunction& v);
double cell_average(std::span<const double> v);
double max_abs_difference(const CellFunction& a, const CellFunction& b);

// L_g v = g v - <g v>.
class CellOperator {
 public:
  explicit CellOperator(CellFunction g);

  const CellFunction& multiplier() const { return g_; }
  CellFunction apply(const CellFunction& v) const;
  // Raw O(n) action, out may not alias in.
  void apply(std::span<const double> in, std::span<double> out, double scale = 1.0) const;
  // diag(g) - 1 (w o g)^T
  Eigen::MatrixXd matrix() const;

 private:
  CellFunction g_;
};

CellFunction apply_L(const CellOperator& op, const CellFunction& v);
// L_1 v = v - <v>
CellFunction fluctuation(const CellFunction& v);

enum class SemigroupMethod { matrix_exp, ode_integrate };

// e^{-tau L_sigma} h
CellFunction semigroup_apply(const CellFunction& sigma, double tau, const CellFunction& h,
                             SemigroupMethod method = SemigroupMethod::matrix_exp);

// Dense matrix e^{-tau L_sigma}.
Eigen::MatrixXd semigroup_matrix(const CellFunction& sigma, double tau);

// RK4 step bound used by the ode-integrate path.
double semigroup_rk4_step(const CellFunction& sigma);

// Fixed-step advance w <- e^{-dt s L_sigma} w, either through the dense
// exponential or through RK4 substeps.
class CellPropagator {
 public:
  CellPropagator(const CellFunction& sigma, double dt, double rate_scale = 1.0,
                 SemigroupMethod method = SemigroupMethod::matrix_exp);

  std::size_t size() const { return op_.multiplier().size(); }
  void advance(std::vector<double>& w) const;
  void advance(Eigen::VectorXd& w) const;

 private:
  CellOperator op_;
  SemigroupMethod method_;
  Eigen::MatrixXd dense_;
  double substep_ = 0.0;
  std::size_t substeps_ = 0;
  double scale_;
};

// (p + L_sigma)^{-1} f for zero-mean f.
CellFunction resolvent_apply(const CellFunction& sigma, double p, const CellFunction& f);

// <1/(p+sigma)>^{-1}
double harmonic_factor_B(const CellFunction& sigma, double p);

}  // namespace homokin
