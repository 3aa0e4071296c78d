#include "homokin/memory_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "homokin/csv.hpp"
#include "homokin/errors.hpp"

namespace homokin {

namespace {

double weighted_mean(const CellFunction& g, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) s += g[j] * v[j];
  return s / static_cast<double>(v.size());
}

SemigroupMethod pick(KernelTabulation method, std::size_t n) {
  switch (method) {
    case KernelTabulation::propagator:
      return SemigroupMethod::matrix_exp;
    case KernelTabulation::rk4:
      return SemigroupMethod::ode_integrate;
    case KernelTabulation::automatic:
      break;
  }
  return n <= 512 ? SemigroupMethod::matrix_exp : SemigroupMethod::ode_integrate;
}

}  // namespace

double memory_kernel_eval(const CellFunction& sigma, double tau, SemigroupMethod method) {
  if (tau < 0.0) throw DomainError("memory_kernel_eval: tau must be nonnegative");
  const auto w = semigroup_apply(sigma, tau, fluctuation(sigma), method);
  return weighted_mean(sigma, w.values());
}

KernelTable tabulate_memory_kernel(const CellFunction& sigma, const TimeGrid& grid, KernelTabulation method,
                                   double rate_scale) {
  KernelTable table{{}, {}, sigma, rate_scale};
  const std::size_t count = grid.count();
  table.taus.resize(count + 1);
  table.values.resize(count + 1);
  const CellPropagator prop(sigma, grid.dt(), rate_scale, pick(method, sigma.size()));
  auto h = fluctuation(sigma);
  std::vector<double> w(h.values().begin(), h.values().end());
  for (std::size_t k = 0; k <= count; ++k) {
    if (k > 0) prop.advance(w);
    table.taus[k] = grid.time(k);
    table.values[k] = weighted_mean(sigma, w);
  }
  return table;
}

CellSource zero_source(PeriodicGrid grid) {
  return [grid](double) { return CellFunction::constant(grid, 0.0); };
}

SourceTable tabulate_homogenized_source(const CellFunction& sigma, const CellSource& f, const CellFunction& u_in,
                                        const TimeGrid& grid) {
  if (!(u_in.grid() == sigma.grid())) throw DimensionError("homogenized source: u_in grid mismatch");
  SourceTable table{{}, {}, f, u_in};
  const std::size_t count = grid.count();
  const std::size_t n = sigma.size();
  const double dt = grid.dt();
  table.times.resize(count + 1);
  table.values.resize(count + 1);

  const CellPropagator prop(sigma, dt, 1.0, pick(KernelTabulation::automatic, n));
  // w_n = e^{-t_n L} L_1 u_in + int_0^{t_n} e^{-(t_n-s)L} L_1 f(s) ds (trapezoid)
  const auto u_fl = fluctuation(u_in);
  std::vector<double> w(u_fl.values().begin(), u_fl.values().end());
  auto f_now = f(0.0);
  if (!(f_now.grid() == sigma.grid())) throw DimensionError("homogenized source: f grid mismatch");
  std::vector<double> g_prev(n);
  for (std::size_t k = 0; k <= count; ++k) {
    if (k > 0) {
      // w <- P (w + dt/2 g_{k-1}) + dt/2 g_k
      for (std::size_t j = 0; j < n; ++j) w[j] += 0.5 * dt * g_prev[j];
      prop.advance(w);
      f_now = f(grid.time(k));
    }
    const double fbar = cell_average(f_now);
    for (std::size_t j = 0; j < n; ++j) g_prev[j] = f_now[j] - fbar;
    if (k > 0)
      for (std::size_t j = 0; j < n; ++j) w[j] += 0.5 * dt * g_prev[j];
    table.times[k] = grid.time(k);
    table.values[k] = fbar - weighted_mean(sigma, w);
  }
  return table;
}

double homogenized_source_eval(const CellFunction& sigma, const CellSource& f, const CellFunction& u_in, double t,
                               double dt) {
  if (t < 0.0) throw DomainError("homogenized_source_eval: t must be nonnegative");
  if (!(dt > 0.0)) throw DomainError("homogenized_source_eval: dt must be positive");
  if (t == 0.0) return tabulate_homogenized_source(sigma, f, u_in, TimeGrid(1.0, 1)).values.front();
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / dt - 1e-9)));
  return tabulate_homogenized_source(sigma, f, u_in, TimeGrid(t, steps)).values.back();
}

double kernel_laplace_semigroup(const CellFunction& sigma, double p) {
  if (!(p > 0.0)) throw DomainError("kernel_laplace_semigroup: p must be positive");
  const auto g = resolvent_apply(sigma, p, fluctuation(sigma));
  return weighted_mean(sigma, g.values());
}

double tartar_kernel_laplace(const CellFunction& sigma, double p) {
  if (!(p > 0.0)) throw DomainError("tartar_kernel_laplace: p must be positive");
  if (sigma.min() + p <= 0.0) throw DomainError("tartar_kernel_laplace: p + sigma must be positive");
  // p + <sigma> - B(p) rewritten as -<(sigma-<sigma>)/(p+sigma)> / <1/(p+sigma)> to avoid cancellation.
  const double mean = cell_average(sigma);
  double num = 0.0, den = 0.0;
  for (double v : sigma.values()) {
    num += (v - mean) / (p + v);
    den += 1.0 / (p + v);
  }
  return -num / den;
}

double laplace_tau_max(double p) { return std::max(20.0, 30.0 / p); }

LaplaceEstimate numeric_laplace(const KernelTable& table, double p) {
  if (!(p > 0.0)) throw DomainError("numeric_laplace: p must be positive");
  const double dt = table.dt();
  if (table.taus.size() < 2 || !(dt > 0.0)) throw DimensionError("numeric_laplace: table too short");
  const double tau_max = laplace_tau_max(p);
  const auto last = static_cast<std::size_t>(std::ceil(tau_max / dt - 1e-9));
  if (last >= table.taus.size())
    throw DomainError("numeric_laplace: table ends at " + format_number(table.taus.back()) + ", needs " +
                      format_number(tau_max));
  double s = 0.0;
  double kmax = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const double wk = (k == 0 || k == last) ? 0.5 : 1.0;
    s += wk * std::exp(-p * table.taus[k]) * table.values[k];
    kmax = std::max(kmax, std::abs(table.values[k]));
  }
  const double end = table.taus[last];
  return {s * dt, kmax * std::exp(-p * end) / p, end};
}

TartarReport verify_tartar_equivalence(const CellFunction& sigma, const std::vector<double>& ps,
                                       const TartarOptions& options) {
  TartarReport r;
  r.ps = ps;
  for (double p : ps)
    if (!(p > 0.0)) throw DomainError("verify_tartar_equivalence: p must be positive");

  KernelTable table{{}, {}, sigma};
  if (options.include_numeric && !ps.empty()) {
    const double tau_max = laplace_tau_max(*std::min_element(ps.begin(), ps.end()));
    const auto count = static_cast<std::size_t>(std::ceil(tau_max / options.dt - 1e-9)) + 1;
    table = tabulate_memory_kernel(sigma, TimeGrid(static_cast<double>(count) * options.dt, count));
  }

  for (double p : ps) {
    const double k = kernel_laplace_semigroup(sigma, p);
    const double m = tartar_kernel_laplace(sigma, p);
    const double rel = std::abs(k - m) / std::max(std::abs(m), 1e-14);
    r.semigroup_route.push_back(k);
    r.tartar_route.push_back(m);
    r.relative_errors.push_back(rel);
    r.max_relative_error = std::max(r.max_relative_error, rel);
    if (options.include_numeric) {
      const auto est = numeric_laplace(table, p);
      r.numeric_route.push_back(est.value);
      r.tail_bounds.push_back(est.tail_bound);
      r.max_numeric_error = std::max(r.max_numeric_error, std::abs(est.value - k));
    }
  }
  return r;
}

void write_kernel_csv(std::ostream& out, const KernelTable& table) {
  CsvTable csv({"tau", "K"});
  for (std::size_t k = 0; k < table.taus.size(); ++k) csv.add_row({table.taus[k], table.values[k]});
  csv.write(out);
}

}  // namespace homokin
