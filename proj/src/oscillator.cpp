#include "homokin/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "homokin/csv.hpp"
#include "homokin/errors.hpp"
#include "homokin/numerics.hpp"
#include "homokin/parallel.hpp"

namespace homokin {

YoungMeasure::YoungMeasure(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty() || atoms_.size() != weights_.size())
    throw DimensionError("YoungMeasure: atoms and weights must be nonempty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!std::isfinite(atoms_[i])) throw DomainError("YoungMeasure: atoms must be finite");
    if (!(weights_[i] >= 0.0)) throw DomainError("YoungMeasure: weights must be nonnegative");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("YoungMeasure: weights must sum to 1");
}

YoungMeasure YoungMeasure::from_periodic(const std::function<double(double)>& b, std::size_t n) {
  if (n == 0) throw DomainError("YoungMeasure: need at least one cell node");
  std::vector<double> atoms(n);
  for (std::size_t j = 0; j < n; ++j) atoms[j] = b((static_cast<double>(j) + 0.5) / static_cast<double>(n));
  // n equal weights 1/n summed in floating point can miss 1 by a few ulps; that is inside the check.
  return {std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

YoungMeasure YoungMeasure::point_mass(double b) { return {{b}, {1.0}}; }

double YoungMeasure::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * atoms_[i];
  return s;
}

double YoungMeasure::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * (atoms_[i] - m) * (atoms_[i] - m);
  return s;
}

double YoungMeasure::max_abs_atom() const {
  double m = 0.0;
  for (double a : atoms_) m = std::max(m, std::abs(a));
  return m;
}

Eigen::Matrix2d skew_A() {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -1.0, 0.0;
  return a;
}

Eigen::Matrix2d rotation(double theta) {
  Eigen::Matrix2d r;
  const double c = std::cos(theta), s = std::sin(theta);
  r << c, s, -s, c;
  return r;
}

Eigen::Vector2d exact_rotation(double b, double t, const Eigen::Vector2d& u_in) { return rotation(b * t) * u_in; }

Eigen::Vector2d cell_averaged_limit(const YoungMeasure& nu, double t, const Eigen::Vector2d& u_in) {
  Eigen::Matrix2d avg = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < nu.atoms().size(); ++i) avg += nu.weights()[i] * rotation(nu.atoms()[i] * t);
  return avg * u_in;
}

Eigen::Matrix2d matrix_M(const YoungMeasure& nu, double p) {
  if (!(p > 0.0)) throw DomainError("matrix_M: p must be positive");
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < nu.atoms().size(); ++i) {
    const double l = nu.atoms()[i];
    Eigen::Matrix2d term;
    term << p, l, -l, p;
    m += nu.weights()[i] / (p * p + l * l) * term;
  }
  return m;
}

Eigen::Matrix2d matrix_B(const YoungMeasure& nu, double p) {
  if (!(p > 0.0)) throw DomainError("matrix_B: p must be positive");
  return matrix_M(nu, p).inverse();
}

namespace {

// Scalar K~ on the eigenspace where A acts as j (j = +-i):
// 1/M - p + b* j = -N / (p M), M = sum w/(p - j l), N = sum w l (b* - l)/(p - j l).
std::complex<double> kernel_branch(const YoungMeasure& nu, std::complex<double> p, std::complex<double> j) {
  const double bs = nu.mean();
  std::complex<double> m = 0.0, n = 0.0;
  for (std::size_t i = 0; i < nu.atoms().size(); ++i) {
    const double l = nu.atoms()[i];
    const std::complex<double> d = p - j * l;
    m += nu.weights()[i] / d;
    n += nu.weights()[i] * l * (bs - l) / d;
  }
  return -n / (p * m);
}

}  // namespace

Eigen::Matrix2cd regularized_kernel_laplace(const YoungMeasure& nu, std::complex<double> p) {
  if (p.real() <= 0.0 && p.imag() == 0.0) throw DomainError("regularized_kernel_laplace: p must be positive");
  constexpr std::complex<double> i(0.0, 1.0);
  const auto zp = kernel_branch(nu, p, i);
  const auto zm = kernel_branch(nu, p, -i);
  const auto alpha = 0.5 * (zp + zm);
  const auto beta = (zp - zm) / (2.0 * i);
  Eigen::Matrix2cd k;
  k << alpha, beta, -beta, alpha;
  return k;
}

Eigen::Matrix2d regularized_kernel_laplace(const YoungMeasure& nu, double p) {
  if (!(p > 0.0)) throw DomainError("regularized_kernel_laplace: p must be positive");
  return regularized_kernel_laplace(nu, std::complex<double>(p, 0.0)).real();
}

namespace {

template <class Value, class F>
Value talbot_sum(const F& f, double t, int nodes, double min_scale, Value zero) {
  if (!(t > 0.0)) throw DomainError("inverse_laplace_talbot: t must be positive");
  if (nodes < 2) throw DomainError("inverse_laplace_talbot: need at least 2 nodes");
  const double r = std::max(2.0 * nodes / (5.0 * t), min_scale);
  auto sum = zero;
  sum += 0.5 * std::exp(r * t) * f(std::complex<double>(r, 0.0));
  for (int k = 1; k < nodes; ++k) {
    const double th = k * std::numbers::pi / nodes;
    const double cot = std::cos(th) / std::sin(th);
    const std::complex<double> p = r * th * std::complex<double>(cot, 1.0);
    const double s = th + (th * cot - 1.0) * cot;
    sum += std::exp(t * p) * std::complex<double>(1.0, s) * f(p);
  }
  return (r / nodes) * sum;
}

}  // namespace

Eigen::Matrix2d inverse_laplace_talbot(const LaplaceMatrixFn& f, double t, int nodes, double min_scale) {
  return talbot_sum(f, t, nodes, min_scale, Eigen::Matrix2cd::Zero().eval()).real();
}

double inverse_laplace_talbot(const LaplaceScalarFn& f, double t, int nodes, double min_scale) {
  return talbot_sum(f, t, nodes, min_scale, std::complex<double>(0.0)).real();
}

double talbot_min_scale(const YoungMeasure& nu) { return 0.65 * nu.max_abs_atom(); }

KernelSeries tabulate_oscillator_kernel(const YoungMeasure& nu, const TimeGrid& grid, int nodes,
                                        std::size_t workers) {
  KernelSeries k;
  k.times.resize(grid.points());
  k.alpha.resize(grid.points());
  k.beta.resize(grid.points());
  const double scale = talbot_min_scale(nu);
  const LaplaceMatrixFn f = [&nu](std::complex<double> p) { return regularized_kernel_laplace(nu, p); };
  parallel_for(grid.points(), workers, [&](std::size_t n) {
    k.times[n] = grid.time(n);
    if (n == 0) {
      k.alpha[0] = nu.variance();
      k.beta[0] = 0.0;
      return;
    }
    const auto m = inverse_laplace_talbot(f, grid.time(n), nodes, scale);
    k.alpha[n] = 0.5 * (m(0, 0) + m(1, 1));
    k.beta[n] = 0.5 * (m(0, 1) - m(1, 0));
  });
  return k;
}

KernelSeries tabulate_oscillator_kernel_resolvent(const YoungMeasure& nu, const TimeGrid& grid) {
  const Eigen::Matrix2d a = skew_A(), id = Eigen::Matrix2d::Identity();
  const double bs = nu.mean(), dt = grid.dt();
  const std::size_t count = grid.points();
  std::vector<Eigen::Matrix2d> g(count, Eigen::Matrix2d::Zero()), dm(count, Eigen::Matrix2d::Zero()), k(count);
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t i = 0; i < nu.atoms().size(); ++i) {
      const double l = nu.atoms()[i], w = nu.weights()[i];
      const Eigen::Matrix2d r = rotation(l * grid.time(n));
      g[n] += w * l * (l - bs) * r;
      dm[n] += w * l * a * r;
    }
  const Eigen::Matrix2d implicit_inv = (id + 0.5 * dt * dm[0]).inverse();
  k[0] = g[0];
  for (std::size_t n = 1; n < count; ++n) {
    Eigen::Matrix2d conv = 0.5 * k[0] * dm[n];
    for (std::size_t j = 1; j < n; ++j) conv.noalias() += k[j] * dm[n - j];
    k[n] = (g[n] - dt * conv) * implicit_inv;
  }
  KernelSeries out;
  for (std::size_t n = 0; n < count; ++n) {
    out.times.push_back(grid.time(n));
    out.alpha.push_back(0.5 * (k[n](0, 0) + k[n](1, 1)));
    out.beta.push_back(0.5 * (k[n](0, 1) - k[n](1, 0)));
  }
  return out;
}

VolterraSolution<2> solve_oscillator_limit(const YoungMeasure& nu, const Eigen::Vector2d& u_in, const TimeGrid& grid,
                                           const OscillatorOptions& options) {
  const Eigen::Matrix2d a = skew_A();
  MatrixVolterra problem;
  problem.decay = -nu.mean() * a;
  problem.u0 = u_in;
  if (nu.variance() > 0.0) {
    const auto k = options.inversion == KernelInversion::talbot
                       ? tabulate_oscillator_kernel(nu, grid, options.talbot_nodes, options.workers)
                       : tabulate_oscillator_kernel_resolvent(nu, grid);
    problem.kernel.resize(grid.points());
    for (std::size_t n = 0; n < grid.points(); ++n)
      problem.kernel[n] = -(k.alpha[n] * Eigen::Matrix2d::Identity() + k.beta[n] * a);
  }
  return solve_volterra(problem, grid);
}

Eigen::Vector2d laplace_of_series(const std::vector<double>& times, const std::vector<Eigen::Vector2d>& values,
                                  double p) {
  if (times.size() != values.size() || times.size() < 2) throw DimensionError("laplace_of_series: bad series");
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (std::size_t n = 0; n + 1 < times.size(); ++n) {
    const double h = times[n + 1] - times[n];
    s += 0.5 * h * (std::exp(-p * times[n]) * values[n] + std::exp(-p * times[n + 1]) * values[n + 1]);
  }
  return s;
}

Eigen::Vector2d laplace_of_function(const std::function<Eigen::Vector2d(double)>& g, double p, double t_end,
                                    std::size_t panels) {
  if (panels == 0 || !(t_end > 0.0)) throw DomainError("laplace_of_function: bad quadrature");
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  const double h = t_end / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const auto rule = gauss_legendre(12, h * static_cast<double>(k), h * static_cast<double>(k + 1));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights[i] * std::exp(-p * rule.nodes[i]) * g(rule.nodes[i]);
  }
  return s;
}

Eigen::Vector2d eps_rotation_average(const std::function<double(double)>& b, double eps, double t,
                                     const Eigen::Vector2d& u_in, double a, double c, std::size_t points_per_period) {
  if (!(eps > 0.0) || !(c > a) || points_per_period == 0) throw DomainError("eps_rotation_average: bad window");
  const auto n = static_cast<std::size_t>(std::ceil((c - a) / eps * static_cast<double>(points_per_period)));
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a + (c - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double y = x / eps;
    s += exact_rotation(b(y - std::floor(y)), t, u_in);
  }
  return s / static_cast<double>(n);
}

void write_kernel_components_csv(std::ostream& out, const KernelSeries& kernel) {
  CsvTable table({"t", "alpha", "beta"});
  for (std::size_t n = 0; n < kernel.times.size(); ++n) table.add_row({kernel.times[n], kernel.alpha[n], kernel.beta[n]});
  table.write(out);
}

}  // namespace homokin
