#include "homokin/cell_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "homokin/errors.hpp"

namespace homokin {

PeriodicGrid::PeriodicGrid(std::size_t n) : n_(n) {
  if (n == 0) throw DomainError("PeriodicGrid: n must be positive");
}

std::vector<double> PeriodicGrid::nodes() const {
  std::vector<double> y(n_);
  for (std::size_t j = 0; j < n_; ++j) y[j] = node(j);
  return y;
}

CellFunction::CellFunction(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw DimensionError("CellFunction: " + std::to_string(values_.size()) + " values for a grid of " +
                         std::to_string(grid_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("CellFunction: non-finite value");
}

CellFunction CellFunction::sample(PeriodicGrid grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.node(j));
  return CellFunction(grid, std::move(v));
}

CellFunction CellFunction::constant(PeriodicGrid grid, double c) {
  return CellFunction(grid, std::vector<double>(grid.size(), c));
}

double CellFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double CellFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

namespace {

void require_same_grid(const CellFunction& a, const CellFunction& b, const char* where) {
  if (!(a.grid() == b.grid()))
    throw DimensionError(std::string(where) + ": grid mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
}

template <class Op>
CellFunction zip(const CellFunction& a, const CellFunction& b, Op op, const char* where) {
  require_same_grid(a, b, where);
  std::vector<double> v(a.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = op(a[j], b[j]);
  return CellFunction(a.grid(), std::move(v));
}

}  // namespace

CellFunction operator+(const CellFunction& a, const CellFunction& b) {
  return zip(a, b, std::plus<>{}, "operator+");
}
CellFunction operator-(const CellFunction& a, const CellFunction& b) {
  return zip(a, b, std::minus<>{}, "operator-");
}
CellFunction operator*(const CellFunction& a, const CellFunction& b) {
  return zip(a, b, std::multiplies<>{}, "operator*");
}
CellFunction operator*(double s, const CellFunction& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= s;
  return CellFunction(a.grid(), std::move(v));
}
CellFunction operator+(const CellFunction& a, double c) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x += c;
  return CellFunction(a.grid(), std::move(v));
}

double cell_average(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double cell_average(const CellFunction& v) { return cell_average(v.values()); }

double max_abs_difference(const CellFunction& a, const CellFunction& b) {
  require_same_grid(a, b, "max_abs_difference");
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

CellOperator::CellOperator(CellFunction g) : g_(std::move(g)) {}

void CellOperator::apply(std::span<const double> in, std::span<double> out, double scale) const {
  const std::size_t n = g_.size();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = g_[j] * in[j];
    s += out[j];
  }
  const double mean = s / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = scale * (out[j] - mean);
}

CellFunction CellOperator::apply(const CellFunction& v) const {
  require_same_grid(g_, v, "apply_L");
  std::vector<double> out(v.size());
  apply(v.values(), out);
  return CellFunction(v.grid(), std::move(out));
}

Eigen::MatrixXd CellOperator::matrix() const {
  const auto n = static_cast<Eigen::Index>(g_.size());
  const double w = g_.grid().weight();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j).setConstant(-w * g_[static_cast<std::size_t>(j)]);
  for (Eigen::Index j = 0; j < n; ++j) m(j, j) += g_[static_cast<std::size_t>(j)];
  return m;
}

CellFunction apply_L(const CellOperator& op, const CellFunction& v) { return op.apply(v); }

CellFunction fluctuation(const CellFunction& v) { return v + (-cell_average(v)); }

double semigroup_rk4_step(const CellFunction& sigma) {
  const double smax = std::max(std::abs(sigma.max()), std::abs(sigma.min()));
  const double bound = smax > 0.0 ? std::min(0.1, 1.0 / (4.0 * smax)) : 0.1;
  // A tenth of the admissible step keeps the RK4 error near 1e-9 over long horizons.
  return bound / 10.0;
}

Eigen::MatrixXd semigroup_matrix(const CellFunction& sigma, double tau) {
  if (tau < 0.0) throw DomainError("semigroup: tau must be nonnegative");
  Eigen::MatrixXd a = -tau * CellOperator(sigma).matrix();
  return a.exp();
}

CellFunction semigroup_apply(const CellFunction& sigma, double tau, const CellFunction& h,
                             SemigroupMethod method) {
  if (tau < 0.0) throw DomainError("semigroup_apply: tau must be nonnegative");
  require_same_grid(sigma, h, "semigroup_apply");
  if (tau == 0.0) return h;

  const std::size_t n = h.size();
  if (method == SemigroupMethod::matrix_exp) {
    Eigen::VectorXd out = semigroup_matrix(sigma, tau) * h.vector();
    return CellFunction(h.grid(), std::vector<double>(out.data(), out.data() + n));
  }

  const auto steps = static_cast<std::size_t>(std::ceil(tau / semigroup_rk4_step(sigma)));
  const CellPropagator prop(sigma, tau / static_cast<double>(steps), 1.0, SemigroupMethod::ode_integrate);
  std::vector<double> w(h.values().begin(), h.values().end());
  for (std::size_t s = 0; s < steps; ++s) prop.advance(w);
  return CellFunction(h.grid(), std::move(w));
}

CellPropagator::CellPropagator(const CellFunction& sigma, double dt, double rate_scale, SemigroupMethod method)
    : op_(sigma), method_(method), scale_(rate_scale) {
  if (dt < 0.0) throw DomainError("CellPropagator: dt must be nonnegative");
  if (method == SemigroupMethod::matrix_exp) {
    dense_ = semigroup_matrix(sigma, dt * rate_scale);
    return;
  }
  const double h = semigroup_rk4_step(sigma) / std::max(std::abs(rate_scale), 1e-300);
  substeps_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt / h - 1e-9)));
  substep_ = dt / static_cast<double>(substeps_);
}

void CellPropagator::advance(Eigen::VectorXd& w) const {
  if (method_ == SemigroupMethod::matrix_exp) {
    w = dense_ * w;
    return;
  }
  std::vector<double> v(w.data(), w.data() + w.size());
  advance(v);
  w = Eigen::Map<Eigen::VectorXd>(v.data(), w.size());
}

void CellPropagator::advance(std::vector<double>& w) const {
  const std::size_t n = w.size();
  if (method_ == SemigroupMethod::matrix_exp) {
    Eigen::Map<Eigen::VectorXd> m(w.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd out = dense_ * m;
    m = out;
    return;
  }
  const double dt = substep_;
  const double a = -scale_;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t s = 0; s < substeps_; ++s) {
    op_.apply(w, k1, a);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = w[j] + 0.5 * dt * k1[j];
    op_.apply(tmp, k2, a);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = w[j] + 0.5 * dt * k2[j];
    op_.apply(tmp, k3, a);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = w[j] + dt * k3[j];
    op_.apply(tmp, k4, a);
    for (std::size_t j = 0; j < n; ++j) w[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

double harmonic_factor_B(const CellFunction& sigma, double p) {
  if (!(p > 0.0)) throw DomainError("harmonic_factor_B: p must be positive");
  if (sigma.min() + p <= 0.0) throw DomainError("harmonic_factor_B: p + sigma must be positive");
  double s = 0.0;
  for (double v : sigma.values()) s += 1.0 / (p + v);
  return static_cast<double>(sigma.size()) / s;
}

CellFunction resolvent_apply(const CellFunction& sigma, double p, const CellFunction& f) {
  if (!(p > 0.0)) throw DomainError("resolvent_apply: p must be positive");
  require_same_grid(sigma, f, "resolvent_apply");
  if (std::abs(cell_average(f)) > 1e-10) throw PreconditionError("resolvent_apply: f must have zero mean");
  const std::size_t n = f.size();
  std::vector<double> q(n);
  for (std::size_t j = 0; j < n; ++j) q[j] = f[j] / (p + sigma[j]);
  const double c = -harmonic_factor_B(sigma, p) * cell_average(q);
  for (std::size_t j = 0; j < n; ++j) q[j] += c / (p + sigma[j]);
  return CellFunction(f.grid(), std::move(q));
}

}  // namespace homokin
