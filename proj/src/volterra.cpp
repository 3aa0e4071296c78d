#include "homokin/volterra.hpp"

#include <cmath>
#include <string>

#include "homokin/csv.hpp"
#include "homokin/errors.hpp"

namespace homokin {

TimeGrid::TimeGrid(double t_end, std::size_t count) : t_end_(t_end), dt_(0.0), count_(count) {
  if (!(t_end > 0.0)) throw DomainError("TimeGrid: t_end must be positive");
  if (count == 0) throw DomainError("TimeGrid: count must be positive");
  dt_ = t_end / static_cast<double>(count);
}

TimeGrid TimeGrid::from_step(double t_end, double dt) {
  if (!(dt > 0.0)) throw DomainError("TimeGrid: dt must be positive");
  const double ratio = t_end / dt;
  const auto count = static_cast<std::size_t>(std::llround(ratio));
  if (count == 0 || std::abs(static_cast<double>(count) * dt - t_end) > 1e-12)
    throw DomainError("TimeGrid: dt " + format_number(dt) + " does not divide t_end " + format_number(t_end));
  return TimeGrid(t_end, count);
}

namespace {

template <int Dim>
void check(const VolterraProblem<Dim>& problem, const TimeGrid& grid) {
  if (!problem.kernel.empty() && problem.kernel.size() < grid.points())
    throw DimensionError("volterra: kernel has " + std::to_string(problem.kernel.size()) + " samples, grid needs " +
                         std::to_string(grid.points()));
  if (!problem.source.empty() && problem.source.size() < grid.points())
    throw DimensionError("volterra: source has " + std::to_string(problem.source.size()) + " samples, grid needs " +
                         std::to_string(grid.points()));
}

// dt [ K_m u_0 / 2 + sum_{j=1}^{m-1} K_{m-j} u_j ], i.e. the trapezoid sum without its u_m term.
template <int Dim>
typename VolterraProblem<Dim>::Vector history(const VolterraProblem<Dim>& problem,
                                              const std::vector<typename VolterraProblem<Dim>::Vector>& u,
                                              std::size_t m, double dt) {
  using Vector = typename VolterraProblem<Dim>::Vector;
  Vector h = Vector::Zero();
  if (problem.kernel.empty() || m == 0) return h;
  h = 0.5 * (problem.kernel[m] * u[0]);
  for (std::size_t j = 1; j < m; ++j) h.noalias() += problem.kernel[m - j] * u[j];
  return dt * h;
}

}  // namespace

template <int Dim>
VolterraSolution<Dim> solve_volterra(const VolterraProblem<Dim>& problem, const TimeGrid& grid) {
  using Matrix = typename VolterraProblem<Dim>::Matrix;
  using Vector = typename VolterraProblem<Dim>::Vector;
  check(problem, grid);
  const double dt = grid.dt();
  const std::size_t count = grid.count();
  const Matrix id = Matrix::Identity();
  const Matrix k0 = problem.kernel.empty() ? Matrix::Zero() : problem.kernel[0];

  const Matrix lhs = id + 0.5 * dt * problem.decay - 0.25 * dt * dt * k0;
  if (std::abs(lhs.determinant()) < 1e-14) throw SolverError("volterra: singular implicit factor");
  const Matrix lhs_inv = lhs.inverse();
  const Matrix explicit_part = id - 0.5 * dt * problem.decay;
  auto src = [&](std::size_t n) -> Vector { return problem.source.empty() ? Vector::Zero() : problem.source[n]; };

  VolterraSolution<Dim> out;
  out.times.resize(count + 1);
  out.values.resize(count + 1);
  out.values[0] = problem.u0;
  out.times[0] = 0.0;
  Vector conv_prev = Vector::Zero();  // full trapezoid convolution at t_n
  for (std::size_t n = 0; n < count; ++n) {
    const Vector h_next = history(problem, out.values, n + 1, dt);
    const Vector rhs = explicit_part * out.values[n] + 0.5 * dt * (conv_prev + h_next) + 0.5 * dt * (src(n) + src(n + 1));
    out.values[n + 1] = lhs_inv * rhs;
    conv_prev = h_next + 0.5 * dt * (k0 * out.values[n + 1]);
    out.times[n + 1] = grid.time(n + 1);
  }
  return out;
}

template <int Dim>
double volterra_residual(const VolterraProblem<Dim>& problem,
                         const std::vector<typename VolterraProblem<Dim>::Vector>& u, const TimeGrid& grid) {
  using Matrix = typename VolterraProblem<Dim>::Matrix;
  using Vector = typename VolterraProblem<Dim>::Vector;
  check(problem, grid);
  const std::size_t count = grid.count();
  if (u.size() != count + 1) throw DimensionError("volterra_residual: solution length does not match grid");
  if (count < 2) throw DimensionError("volterra_residual: needs at least two steps");
  const double dt = grid.dt();
  const Matrix k0 = problem.kernel.empty() ? Matrix::Zero() : problem.kernel[0];
  double worst = 0.0;
  for (std::size_t n = 0; n <= count; ++n) {
    Vector du;
    if (n == 0)
      du = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt);
    else if (n == count)
      du = (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * dt);
    else
      du = (u[n + 1] - u[n - 1]) / (2.0 * dt);
    Vector conv = history(problem, u, n, dt);
    if (n > 0) conv += 0.5 * dt * (k0 * u[n]);
    const Vector s = problem.source.empty() ? Vector::Zero() : problem.source[n];
    const Vector r = du + problem.decay * u[n] - conv - s;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

ScalarVolterra scalar_problem(double a, const std::vector<double>& kernel, const std::vector<double>& source,
                              double u0) {
  ScalarVolterra p;
  p.decay(0, 0) = a;
  p.u0(0) = u0;
  p.kernel.resize(kernel.size());
  for (std::size_t j = 0; j < kernel.size(); ++j) p.kernel[j](0, 0) = kernel[j];
  p.source.resize(source.size());
  for (std::size_t j = 0; j < source.size(); ++j) p.source[j](0) = source[j];
  return p;
}

std::vector<double> scalar_values(const VolterraSolution<1>& solution) {
  std::vector<double> v(solution.values.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = solution.values[j](0);
  return v;
}

template <int Dim>
void write_solution_csv(std::ostream& out, const VolterraSolution<Dim>& solution) {
  CsvTable csv(Dim == 1 ? std::vector<std::string>{"t", "u"} : std::vector<std::string>{"t", "u1", "u2"});
  for (std::size_t n = 0; n < solution.times.size(); ++n) {
    std::vector<double> row{solution.times[n]};
    for (int i = 0; i < Dim; ++i) row.push_back(solution.values[n](i));
    csv.add_row(row);
  }
  csv.write(out);
}

template VolterraSolution<1> solve_volterra<1>(const VolterraProblem<1>&, const TimeGrid&);
template VolterraSolution<2> solve_volterra<2>(const VolterraProblem<2>&, const TimeGrid&);
template double volterra_residual<1>(const VolterraProblem<1>&, const std::vector<VolterraProblem<1>::Vector>&,
                                     const TimeGrid&);
template double volterra_residual<2>(const VolterraProblem<2>&, const std::vector<VolterraProblem<2>::Vector>&,
                                     const TimeGrid&);
template void write_solution_csv<1>(std::ostream&, const VolterraSolution<1>&);
template void write_solution_csv<2>(std::ostream&, const VolterraSolution<2>&);

}  // namespace homokin
