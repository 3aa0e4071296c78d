#include "homokin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "homokin/cell_calculus.hpp"
#include "homokin/csv.hpp"
#include "homokin/errors.hpp"
#include "homokin/numerics.hpp"
#include "homokin/parallel.hpp"

namespace homokin {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double periodic(double y) { return y - std::floor(y); }

void validate(const OpticalParameters& p) {
  if (!p.sigma || !p.kappa1 || !p.kappa2) throw PreconditionError("OpticalParameters: sigma, kappa1, kappa2 must be set");
  if (!(p.e_max > p.e_min) || p.e_min < 0.0) throw DomainError("OpticalParameters: need 0 <= e_min < e_max");
}

// Discretized eps-problem on the (omega, E) grid.
struct EpsOperator {
  AngleGrid angles;
  TransportEnergyMesh mesh;
  std::size_t ne;
  std::vector<double> sqrt_e;
  std::vector<double> sigma;  // sigma^eps [i * ne + e]
  std::vector<double> k1;     // kappa1(mu_d, E_e) [d * ne + e]
  std::vector<double> k2;     // h kappa2(mu_d, E_e, E_e/eps) [d * ne + e]

  EpsOperator(const OpticalParameters& p, double epsilon, const TransportGrid& grid)
      : angles(grid.n_omega), mesh(transport_energy_mesh(p, epsilon, grid.points_per_period)), ne(mesh.cells) {
    validate(p);
    const std::size_t n = angles.size();
    sqrt_e.resize(ne);
    sigma.resize(n * ne);
    k1.resize(n * ne);
    k2.resize(n * ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const double en = mesh.node(e);
      const double y = periodic(en / epsilon);
      sqrt_e[e] = std::sqrt(en);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = p.sigma(angles.theta(i), en, y);
        if (!(s >= 0.0)) throw DomainError("OpticalParameters: sigma must be nonnegative");
        sigma[i * ne + e] = sqrt_e[e] * s;
      }
      for (std::size_t d = 0; d < n; ++d) {
        const double mu = angles.mu(d);
        k1[d * ne + e] = p.kappa1(mu, en);
        k2[d * ne + e] = mesh.h * p.kappa2(mu, en, y);
        if (k1[d * ne + e] < 0.0 || k2[d * ne + e] < 0.0) throw DomainError("OpticalParameters: kappa must be nonnegative");
      }
    }
  }

  std::size_t size() const { return angles.size() * ne; }

  // out = int int kappa^eps psi(omega', E') d omega' dE'
  void scatter(const std::vector<double>& psi, std::vector<double>& out, std::vector<double>& m) const {
    const std::size_t n = angles.size();
    m.assign(n * n, 0.0);
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t ip = 0; ip < n; ++ip) {
        double s = 0.0;
        for (std::size_t e = 0; e < ne; ++e) s += k2[d * ne + e] * psi[ip * ne + e];
        m[d * n + ip] = s;
      }
    const double dw = angles.weight();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = 0; e < ne; ++e) {
        double s = 0.0;
        for (std::size_t ip = 0; ip < n; ++ip) {
          const std::size_t d = (i + n - ip) % n;
          s += k1[d * ne + e] * m[d * n + ip];
        }
        out[i * ne + e] = sqrt_e[e] * dw * s;
      }
  }
};

}  // namespace

AngleGrid::AngleGrid(std::size_t count) : n(count) {
  if (n == 0) throw DomainError("AngleGrid: need at least one angle");
}

double AngleGrid::theta(std::size_t i) const { return two_pi * static_cast<double>(i) / static_cast<double>(n); }
double AngleGrid::weight() const { return two_pi / static_cast<double>(n); }
double AngleGrid::mu(std::size_t d) const { return std::cos(theta(d % n)); }

TransportEnergyMesh transport_energy_mesh(const OpticalParameters& params, double epsilon,
                                          std::size_t points_per_period) {
  if (!(epsilon > 0.0) || epsilon > 1.0) throw DomainError("transport: epsilon must lie in (0, 1]");
  if (points_per_period == 0) throw DomainError("transport: points_per_period must be positive");
  const double width = params.e_max - params.e_min;
  const auto cells = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(width / epsilon * static_cast<double>(points_per_period))));
  return {params.e_min, width / static_cast<double>(cells), cells};
}

KappaBars kappa_bars(const OpticalParameters& params, double epsilon, const TransportGrid& grid) {
  const EpsOperator op(params, epsilon, grid);
  const std::size_t n = op.angles.size(), ne = op.ne;
  const double dw = op.angles.weight();
  std::vector<double> k2_total(n, 0.0), k1_weighted(n, 0.0);
  for (std::size_t d = 0; d < n; ++d)
    for (std::size_t e = 0; e < ne; ++e) {
      k2_total[d] += op.k2[d * ne + e];
      k1_weighted[d] += op.mesh.h * op.sqrt_e[e] * op.k1[d * ne + e];
    }
  KappaBars out{n, {}, std::vector<double>(n * ne), std::vector<double>(n * ne)};
  for (std::size_t e = 0; e < ne; ++e) out.energies.push_back(op.mesh.node(e));
  for (std::size_t e = 0; e < ne; ++e) {
    double bar = 0.0, tilde = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      bar += op.k1[d * ne + e] * k2_total[d];
      tilde += op.k2[d * ne + e] / op.mesh.h * k1_weighted[d];
    }
    // kappa depends on omega only through mu, so both bars are angle independent
    for (std::size_t i = 0; i < n; ++i) {
      out.bar[i * ne + e] = op.sqrt_e[e] * dw * bar;
      out.tilde[i * ne + e] = dw * tilde;
    }
  }
  return out;
}

SubcriticalityReport subcriticality_check(const OpticalParameters& params, double epsilon,
                                          const TransportGrid& grid) {
  const EpsOperator op(params, epsilon, grid);
  const auto bars = kappa_bars(params, epsilon, grid);
  SubcriticalityReport r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < op.size(); ++k) {
    r.margin = std::min({r.margin, op.sigma[k] - bars.bar[k], op.sigma[k] - bars.tilde[k]});
    r.min_sigma = std::min(r.min_sigma, op.sigma[k]);
  }
  return r;
}

namespace {

double quotient(const EpsOperator& op, const std::vector<double>& f, std::vector<double>& kf,
                std::vector<double>& m) {
  op.scatter(f, kf, m);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    num += f[k] * (op.sigma[k] * f[k] - kf[k]);
    den += f[k] * f[k];
  }
  if (!(den > 0.0)) throw DomainError("rayleigh_quotient: f must be nonzero");
  return num / den;
}

}  // namespace

double rayleigh_quotient(const OpticalParameters& params, double epsilon, const std::vector<double>& f,
                         const TransportGrid& grid) {
  const EpsOperator op(params, epsilon, grid);
  if (f.size() != op.size()) throw DimensionError("rayleigh_quotient: f has the wrong size");
  std::vector<double> kf(f.size()), m;
  return quotient(op, f, kf, m);
}

double coercivity_test(const OpticalParameters& params, double epsilon, std::size_t trials, std::uint64_t seed,
                       const TransportGrid& grid) {
  if (trials == 0) throw DomainError("coercivity_test: need at least one trial");
  const EpsOperator op(params, epsilon, grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(op.size()), kf(op.size()), m;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& v : f) v = u(rng);
    best = std::min(best, quotient(op, f, kf, m));
  }
  return best;
}

void check_interior(const OpticalParameters& params, const TransportRun& run) {
  if (!(run.T > 0.0)) throw ConfigError("transport: T must be positive");
  if (!(run.support_radius > 0.0)) throw ConfigError("transport: support_radius must be positive");
  const double reach = run.support_radius + std::sqrt(params.e_max) * run.T;
  if (reach > run.r_box + 1e-12)
    throw ConfigError("transport: characteristics leave the r-box (support_radius + sqrt(E_max) T = " +
                      format_number(reach) + " > r_box = " + format_number(run.r_box) + ")");
}

std::vector<double> r_nodes(const TransportRun& run) {
  if (run.n_r == 0) throw ConfigError("transport: n_r must be positive");
  std::vector<double> r(run.n_r);
  for (std::size_t k = 0; k < run.n_r; ++k)
    r[k] = -run.support_radius + 2.0 * run.support_radius * (static_cast<double>(k) + 0.5) / static_cast<double>(run.n_r);
  return r;
}

namespace {

std::vector<std::size_t> stored_steps(const TransportRun& run) {
  if (run.time_steps == 0 || run.output_stride == 0) throw ConfigError("transport: time_steps and output_stride must be positive");
  std::vector<std::size_t> s;
  for (std::size_t k = 0; k <= run.time_steps; k += run.output_stride) s.push_back(k);
  if (s.back() != run.time_steps) s.push_back(run.time_steps);
  return s;
}

}  // namespace

TransportField solve_characteristics_eps(const OpticalParameters& params, const TransportInitial& phi_in,
                                         double epsilon, const TransportRun& run, const TransportGrid& grid) {
  if (!phi_in) throw PreconditionError("transport: phi_in must be set");
  check_interior(params, run);
  const EpsOperator op(params, epsilon, grid);
  const std::size_t n = op.angles.size(), ne = op.ne, dim = op.size();
  const double dt = run.T / static_cast<double>(run.time_steps);
  const auto steps = stored_steps(run);

  TransportField out;
  out.r = r_nodes(run);
  for (std::size_t i = 0; i < n; ++i) out.theta.push_back(op.angles.theta(i));
  for (std::size_t e = 0; e < ne; ++e) out.energies.push_back(op.mesh.node(e));
  out.energy_weights.assign(ne, op.mesh.h);
  for (std::size_t s : steps) out.times.push_back(static_cast<double>(s) * dt);
  out.values.assign(steps.size(), std::vector<double>(out.r.size() * dim));

  std::vector<ExpWeights> w(dim);
  for (std::size_t k = 0; k < dim; ++k) w[k] = exp_weights(op.sigma[k], dt);

  parallel_for(out.r.size(), run.workers, [&](std::size_t ri) {
    std::vector<double> psi(dim), next(dim), g(dim), g_next(dim), g_iter(dim), m;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = 0; e < ne; ++e) {
        const double en = op.mesh.node(e);
        psi[i * ne + e] = phi_in(out.r[ri], op.angles.theta(i), en, periodic(en / epsilon));
      }
    auto store = [&](std::size_t slot) { std::copy(psi.begin(), psi.end(), out.values[slot].begin() + ri * dim); };
    std::size_t slot = 0;
    store(slot++);
    op.scatter(psi, g, m);
    for (std::size_t step = 1; step <= run.time_steps; ++step) {
      g_next = g;
      for (int iter = 0;; ++iter) {
        double scale = 1.0, change = 0.0;
        for (std::size_t k = 0; k < dim; ++k) next[k] = w[k].decay * psi[k] + w[k].w0 * g[k] + w[k].w1 * g_next[k];
        op.scatter(next, g_iter, m);
        for (std::size_t k = 0; k < dim; ++k) {
          change = std::max(change, std::abs(g_iter[k] - g_next[k]));
          scale = std::max(scale, std::abs(g_iter[k]));
        }
        g_next.swap(g_iter);
        if (change <= 1e-15 * scale) break;
        if (iter == 100) throw SolverError("transport: fixed-point iteration did not converge at step " + std::to_string(step));
      }
      for (std::size_t k = 0; k < dim; ++k) psi[k] = w[k].decay * psi[k] + w[k].w0 * g[k] + w[k].w1 * g_next[k];
      g.swap(g_next);
      if (slot < steps.size() && steps[slot] == step) store(slot++);
    }
  });
  return out;
}

namespace {

// Two-scale grid data shared by the RK4 and memory-kernel routes.
struct TwoScaleOperator {
  AngleGrid angles;
  GaussRule gauss;
  std::size_t ne, ny;
  std::vector<double> sqrt_e;
  std::vector<double> sigma;    // sigma(theta_i, E_e, y_j) [(i * ne + e) * ny + j]
  std::vector<double> sbar;     // <sigma> [i * ne + e]
  std::vector<double> k1;       // [d * ne + e]
  std::vector<double> k2;       // [(d * ne + e) * ny + j]
  std::vector<double> k2_mean;  // [d * ne + e]

  TwoScaleOperator(const OpticalParameters& p, const TwoScaleTransportGrid& g)
      : angles(g.n_omega), gauss(gauss_legendre(g.n_energy, p.e_min, p.e_max)), ne(g.n_energy), ny(g.n_cell) {
    validate(p);
    if (ne == 0 || ny == 0) throw DomainError("two-scale transport: grid sizes must be positive");
    const std::size_t n = angles.size();
    sqrt_e.resize(ne);
    sigma.resize(n * ne * ny);
    sbar.assign(n * ne, 0.0);
    k1.resize(n * ne);
    k2.resize(n * ne * ny);
    k2_mean.assign(n * ne, 0.0);
    const PeriodicGrid cell(ny);
    for (std::size_t e = 0; e < ne; ++e) {
      const double en = gauss.nodes[e];
      sqrt_e[e] = std::sqrt(en);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
          const double s = p.sigma(angles.theta(i), en, cell.node(j));
          sigma[(i * ne + e) * ny + j] = s;
          sbar[i * ne + e] += s / static_cast<double>(ny);
        }
      for (std::size_t d = 0; d < n; ++d) {
        k1[d * ne + e] = p.kappa1(angles.mu(d), en);
        for (std::size_t j = 0; j < ny; ++j) {
          const double v = p.kappa2(angles.mu(d), en, cell.node(j));
          k2[(d * ne + e) * ny + j] = v;
          k2_mean[d * ne + e] += v / static_cast<double>(ny);
        }
      }
    }
  }

  std::size_t nodes() const { return angles.size() * ne; }

  // out(i, e) = sqrt(E_e) dw sum_{i'} kappa1(mu_{i-i'}, E_e) sum_{e'} w_{e'} m(i-i', i', e')
  void combine(const std::vector<double>& m, std::vector<double>& out) const {
    const std::size_t n = angles.size();
    std::vector<double> me(n * n, 0.0);
    for (std::size_t d = 0; d < n; ++d)
      for (std::size_t ip = 0; ip < n; ++ip) {
        double s = 0.0;
        for (std::size_t e = 0; e < ne; ++e) s += gauss.weights[e] * m[(d * n + ip) * ne + e];
        me[d * n + ip] = s;
      }
    const double dw = angles.weight();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = 0; e < ne; ++e) {
        double s = 0.0;
        for (std::size_t ip = 0; ip < n; ++ip) {
          const std::size_t d = (i + n - ip) % n;
          s += k1[d * ne + e] * me[d * n + ip];
        }
        out[i * ne + e] = sqrt_e[e] * dw * s;
      }
  }
};

TransportField hom_field_shell(const TwoScaleOperator& op, const TransportRun& run, const std::vector<std::size_t>& steps) {
  TransportField f;
  f.r = r_nodes(run);
  for (std::size_t i = 0; i < op.angles.size(); ++i) f.theta.push_back(op.angles.theta(i));
  f.energies = op.gauss.nodes;
  f.energy_weights = op.gauss.weights;
  const double dt = run.T / static_cast<double>(run.time_steps);
  for (std::size_t s : steps) f.times.push_back(static_cast<double>(s) * dt);
  f.values.assign(steps.size(), std::vector<double>(f.r.size() * op.nodes()));
  return f;
}

}  // namespace

TwoScaleTransport solve_two_scale_transport(const OpticalParameters& params, const TransportInitial& phi_in,
                                            const TransportRun& run, const TwoScaleTransportGrid& grid) {
  if (!phi_in) throw PreconditionError("transport: phi_in must be set");
  const TwoScaleOperator op(params, grid);
  const auto steps = stored_steps(run);
  TwoScaleTransport out{hom_field_shell(op, run, steps), 0.0};
  const std::size_t n = op.angles.size(), ne = op.ne, ny = op.ny, nodes = op.nodes();
  const std::size_t dim = nodes * (1 + ny);  // [psi_hom | rho]
  const double dt = run.T / static_cast<double>(run.time_steps);
  const PeriodicGrid cell(ny);
  std::vector<double> max_mean(out.psi_hom.r.size(), 0.0);

  parallel_for(out.psi_hom.r.size(), run.workers, [&](std::size_t ri) {
    const double r1 = out.psi_hom.r[ri];
    std::vector<double> state(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = 0; e < ne; ++e) {
        const std::size_t k = i * ne + e;
        double mean = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
          const double v = phi_in(r1, op.angles.theta(i), op.gauss.nodes[e], cell.node(j));
          state[nodes + k * ny + j] = v;
          mean += v / static_cast<double>(ny);
        }
        state[k] = mean;
        for (std::size_t j = 0; j < ny; ++j) state[nodes + k * ny + j] -= mean;
      }

    std::vector<double> m(n * n * ne), s(nodes), sr(nodes);
    auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx) {
      // m(d, i', e') = <kappa2(mu_d, E_e', .) psi^0(i', e', .)>
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t ip = 0; ip < n; ++ip)
          for (std::size_t e = 0; e < ne; ++e) {
            const std::size_t k = ip * ne + e;
            const double* kk = &op.k2[(d * ne + e) * ny];
            const double* rho = &x[nodes + k * ny];
            double acc = 0.0;
            for (std::size_t j = 0; j < ny; ++j) acc += kk[j] * rho[j];
            m[(d * n + ip) * ne + e] = acc / static_cast<double>(ny) + op.k2_mean[d * ne + e] * x[k];
          }
      op.combine(m, s);
      for (std::size_t k = 0; k < nodes; ++k) {
        const std::size_t e = k % ne;
        const double* sig = &op.sigma[k * ny];
        const double* rho = &x[nodes + k * ny];
        double acc = 0.0;
        for (std::size_t j = 0; j < ny; ++j) acc += sig[j] * rho[j];
        sr[k] = acc / static_cast<double>(ny);
        const double se = op.sqrt_e[e];
        dx[k] = -se * op.sbar[k] * x[k] + s[k] - se * sr[k];
        double* drho = &dx[nodes + k * ny];
        for (std::size_t j = 0; j < ny; ++j)
          drho[j] = -se * (sig[j] * rho[j] - sr[k]) + se * (op.sbar[k] - sig[j]) * x[k];
      }
    };

    auto record_mean = [&] {
      for (std::size_t k = 0; k < nodes; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < ny; ++j) acc += state[nodes + k * ny + j];
        max_mean[ri] = std::max(max_mean[ri], std::abs(acc / static_cast<double>(ny)));
      }
    };
    auto store = [&](std::size_t slot) {
      std::copy(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(nodes),
                out.psi_hom.values[slot].begin() + static_cast<std::ptrdiff_t>(ri * nodes));
    };
    std::size_t slot = 0;
    store(slot++);
    record_mean();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (std::size_t step = 1; step <= run.time_steps; ++step) {
      rhs(state, k1);
      for (std::size_t q = 0; q < dim; ++q) tmp[q] = state[q] + 0.5 * dt * k1[q];
      rhs(tmp, k2);
      for (std::size_t q = 0; q < dim; ++q) tmp[q] = state[q] + 0.5 * dt * k2[q];
      rhs(tmp, k3);
      for (std::size_t q = 0; q < dim; ++q) tmp[q] = state[q] + dt * k3[q];
      rhs(tmp, k4);
      for (std::size_t q = 0; q < dim; ++q) state[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
      record_mean();
      if (slot < steps.size() && steps[slot] == step) store(slot++);
    }
  });
  out.max_mean_rho = *std::max_element(max_mean.begin(), max_mean.end());
  return out;
}

TransportField solve_transport_memory_route(const OpticalParameters& params, const TransportInitial& phi_in,
                                            const TransportRun& run, const TwoScaleTransportGrid& grid) {
  if (!phi_in) throw PreconditionError("transport: phi_in must be set");
  const TwoScaleOperator op(params, grid);
  const auto steps = stored_steps(run);
  TransportField out = hom_field_shell(op, run, steps);
  const std::size_t n = op.angles.size(), ne = op.ne, ny = op.ny, nodes = op.nodes();
  const std::size_t nt = run.time_steps;
  const double dt = run.T / static_cast<double>(nt);
  const PeriodicGrid cell(ny);

  // Per node (i', e'): a_n = e^{-n dt sqrt(E') L_sigma} L_1 sigma, with
  // ks[k][n] = <sigma a_n> and kk[(d, k)][n] = <kappa2(mu_d, E', .) a_n>.
  std::vector<CellPropagator> props;
  props.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const CellFunction sig(cell, std::vector<double>(op.sigma.begin() + static_cast<std::ptrdiff_t>(k * ny),
                                                     op.sigma.begin() + static_cast<std::ptrdiff_t>((k + 1) * ny)));
    props.emplace_back(sig, dt, op.sqrt_e[k % ne]);
  }
  auto moments = [&](std::size_t k, std::vector<double> a, std::vector<double>& with_sigma,
                     std::vector<double>& with_kappa) {
    with_sigma.assign(nt + 1, 0.0);
    with_kappa.assign(n * (nt + 1), 0.0);
    const std::size_t e = k % ne;
    for (std::size_t step = 0; step <= nt; ++step) {
      if (step > 0) props[k].advance(a);
      double s = 0.0;
      for (std::size_t j = 0; j < ny; ++j) s += op.sigma[k * ny + j] * a[j];
      with_sigma[step] = s / static_cast<double>(ny);
      for (std::size_t d = 0; d < n; ++d) {
        double c = 0.0;
        for (std::size_t j = 0; j < ny; ++j) c += op.k2[(d * ne + e) * ny + j] * a[j];
        with_kappa[d * (nt + 1) + step] = c / static_cast<double>(ny);
      }
    }
  };
  std::vector<std::vector<double>> ks(nodes), kk(nodes);
  parallel_for(nodes, run.workers, [&](std::size_t k) {
    std::vector<double> a(ny);
    for (std::size_t j = 0; j < ny; ++j) a[j] = op.sigma[k * ny + j] - op.sbar[k];
    moments(k, a, ks[k], kk[k]);
  });

  parallel_for(out.r.size(), run.workers, [&](std::size_t ri) {
    const double r1 = out.r[ri];
    // Source: F(t)(i,e) = S(b)(i,e) - sqrt(E) <sigma b>, b = e^{-t sqrt(E) L_sigma} L_1 phi_in.
    std::vector<std::vector<double>> fs(nodes), fk(nodes);
    std::vector<double> psi(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      const std::size_t i = k / ne, e = k % ne;
      std::vector<double> b(ny);
      double mean = 0.0;
      for (std::size_t j = 0; j < ny; ++j) {
        b[j] = phi_in(r1, op.angles.theta(i), op.gauss.nodes[e], cell.node(j));
        mean += b[j] / static_cast<double>(ny);
      }
      for (auto& v : b) v -= mean;
      psi[k] = mean;
      moments(k, b, fs[k], fk[k]);
    }
    std::vector<double> m(n * n * ne), source(nodes), hist(nodes), g(nodes), g_next(nodes), next(nodes), lin(nodes);
    auto eval_source = [&](std::size_t step) {
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t ip = 0; ip < n; ++ip)
          for (std::size_t e = 0; e < ne; ++e) m[(d * n + ip) * ne + e] = fk[ip * ne + e][d * (nt + 1) + step];
      op.combine(m, source);
      for (std::size_t k = 0; k < nodes; ++k) source[k] -= op.sqrt_e[k % ne] * fs[k][step];
    };
    // -sqrt(E) <sigma> psi + S(psi) for y-independent psi
    auto linear = [&](const std::vector<double>& x, std::vector<double>& outv) {
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t ip = 0; ip < n; ++ip)
          for (std::size_t e = 0; e < ne; ++e) m[(d * n + ip) * ne + e] = op.k2_mean[d * ne + e] * x[ip * ne + e];
      op.combine(m, outv);
      for (std::size_t k = 0; k < nodes; ++k) outv[k] -= op.sqrt_e[k % ne] * op.sbar[k] * x[k];
    };
    std::vector<std::vector<double>> history(nt + 1, std::vector<double>(nodes));
    history[0] = psi;
    // Trapezoid convolutions at `step` without their j = step term: dt sum' K_{step-j} psi_j.
    std::vector<double> conv_s(nodes), conv_k(n * n * ne), mem_k(nodes);
    auto history_sums = [&](std::size_t step) {
      for (std::size_t k = 0; k < nodes; ++k) {
        const std::size_t ip = k / ne, e = k % ne;
        double s = 0.5 * ks[k][step] * history[0][k];
        for (std::size_t j = 1; j < step; ++j) s += ks[k][step - j] * history[j][k];
        conv_s[k] = dt * s;
        for (std::size_t d = 0; d < n; ++d) {
          const double* kern = &kk[k][d * (nt + 1)];
          double c = 0.5 * kern[step] * history[0][k];
          for (std::size_t j = 1; j < step; ++j) c += kern[step - j] * history[j][k];
          conv_k[(d * n + ip) * ne + e] = dt * op.sqrt_e[e] * c;
        }
      }
    };
    // E int K_sigma psi - S-type combination of sqrt(E') int K_kappa psi, with psi_step = x
    auto memory = [&](const std::vector<double>& x, std::vector<double>& outv) {
      for (std::size_t d = 0; d < n; ++d)
        for (std::size_t k = 0; k < nodes; ++k) {
          const std::size_t ip = k / ne, e = k % ne;
          m[(d * n + ip) * ne + e] =
              conv_k[(d * n + ip) * ne + e] + 0.5 * dt * op.sqrt_e[e] * kk[k][d * (nt + 1)] * x[k];
        }
      op.combine(m, mem_k);
      for (std::size_t k = 0; k < nodes; ++k)
        outv[k] = op.gauss.nodes[k % ne] * (conv_s[k] + 0.5 * dt * ks[k][0] * x[k]) - mem_k[k];
    };
    // right-hand side at `step`; history_sums(step) must be current
    auto full = [&](std::size_t step, const std::vector<double>& x, std::vector<double>& outv) {
      eval_source(step);
      linear(x, lin);
      if (step == 0)
        std::fill(hist.begin(), hist.end(), 0.0);
      else
        memory(x, hist);
      for (std::size_t k = 0; k < nodes; ++k) outv[k] = lin[k] + source[k] + hist[k];
    };

    auto store = [&](std::size_t slot) {
      std::copy(psi.begin(), psi.end(), out.values[slot].begin() + static_cast<std::ptrdiff_t>(ri * nodes));
    };
    std::size_t slot = 0;
    store(slot++);
    full(0, psi, g);
    std::vector<double> candidate(nodes);
    for (std::size_t step = 1; step <= nt; ++step) {
      history_sums(step);
      for (std::size_t k = 0; k < nodes; ++k) next[k] = psi[k] + dt * g[k];
      for (int iter = 0;; ++iter) {
        full(step, next, g_next);
        double change = 0.0, scale = 1.0;
        for (std::size_t k = 0; k < nodes; ++k) {
          candidate[k] = psi[k] + 0.5 * dt * (g[k] + g_next[k]);
          change = std::max(change, std::abs(candidate[k] - next[k]));
          scale = std::max(scale, std::abs(candidate[k]));
        }
        next.swap(candidate);
        if (change <= 1e-15 * scale) break;
        if (iter == 100) throw SolverError("transport memory route: fixed-point iteration did not converge");
      }
      psi = next;
      full(step, psi, g);
      history[step] = psi;
      if (slot < steps.size() && steps[slot] == step) store(slot++);
    }
  });
  return out;
}

namespace {

// Barycentric Lagrange interpolation through arbitrary distinct nodes.
class Barycentric {
 public:
  explicit Barycentric(std::vector<double> x) : x_(std::move(x)), w_(x_.size(), 1.0) {
    const double lo = *std::min_element(x_.begin(), x_.end()), hi = *std::max_element(x_.begin(), x_.end());
    const double scale = x_.size() > 1 ? 4.0 / (hi - lo) : 1.0;
    for (std::size_t j = 0; j < x_.size(); ++j)
      for (std::size_t k = 0; k < x_.size(); ++k)
        if (k != j) w_[j] /= scale * (x_[j] - x_[k]);
  }
  // Row of interpolation coefficients at point t.
  std::vector<double> row(double t) const {
    std::vector<double> c(x_.size(), 0.0);
    for (std::size_t j = 0; j < x_.size(); ++j)
      if (t == x_[j]) {
        c[j] = 1.0;
        return c;
      }
    double total = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      c[j] = w_[j] / (t - x_[j]);
      total += c[j];
    }
    for (auto& v : c) v /= total;
    return c;
  }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

}  // namespace

double transport_weak_error(const TransportField& eps, const TransportField& hom, double a, double b) {
  if (eps.times.size() != hom.times.size() || eps.r.size() != hom.r.size() || eps.theta.size() != hom.theta.size())
    throw DimensionError("transport_weak_error: fields are on different (t, r, omega) grids");
  for (std::size_t t = 0; t < eps.times.size(); ++t)
    if (std::abs(eps.times[t] - hom.times[t]) > 1e-12) throw DimensionError("transport_weak_error: time grids differ");
  if (!(b > a)) throw DomainError("transport_weak_error: empty window");
  const Barycentric interp(hom.energies);
  // window weights pulled back onto the hom nodes: sum_i h_i l_j(E_i)
  std::vector<double> pulled(hom.energies.size(), 0.0);
  std::vector<std::size_t> window;
  for (std::size_t e = 0; e < eps.energies.size(); ++e) {
    if (eps.energies[e] < a || eps.energies[e] > b) continue;
    window.push_back(e);
    const auto c = interp.row(eps.energies[e]);
    for (std::size_t j = 0; j < c.size(); ++j) pulled[j] += eps.energy_weights[e] * c[j];
  }
  double err = 0.0;
  for (std::size_t t = 0; t < eps.times.size(); ++t)
    for (std::size_t r = 0; r < eps.r.size(); ++r)
      for (std::size_t o = 0; o < eps.theta.size(); ++o) {
        double s = 0.0;
        for (std::size_t e : window) s += eps.energy_weights[e] * eps.values[t][eps.index(r, o, e)];
        for (std::size_t j = 0; j < pulled.size(); ++j) s -= pulled[j] * hom.values[t][hom.index(r, o, j)];
        err = std::max(err, std::abs(s));
      }
  return err;
}

double transport_linf_l2(const TransportField& field) {
  const double dr = field.r.size() > 1 ? field.r[1] - field.r[0] : 1.0;
  const double dw = two_pi / static_cast<double>(field.theta.size());
  double best = 0.0;
  for (const auto& row : field.values) {
    double s = 0.0;
    for (std::size_t r = 0; r < field.r.size(); ++r)
      for (std::size_t o = 0; o < field.theta.size(); ++o)
        for (std::size_t e = 0; e < field.energies.size(); ++e) {
          const double v = row[field.index(r, o, e)];
          s += dr * dw * field.energy_weights[e] * v * v;
        }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

OpticalParameters transport_preset(const std::string& name) {
  OpticalParameters p;
  p.e_min = 0.25;
  p.e_max = 1.0;
  p.sigma = [](double, double, double y) { return 2.0 + 0.5 * std::sin(two_pi * y); };
  if (name == "transport-subcritical-1") {
    p.kappa1 = [](double mu, double) { return 0.8 * (1.0 + 0.5 * mu) / two_pi; };
    p.kappa2 = [](double, double, double y) { return 1.0 + 0.5 * std::sin(two_pi * y); };
    return p;
  }
  if (name == "transport-kappa0") {
    p.kappa1 = [](double, double) { return 0.0; };
    p.kappa2 = [](double, double, double) { return 0.0; };
    return p;
  }
  throw ConfigError("unknown transport preset '" + name + "' (expected transport-subcritical-1 or transport-kappa0)");
}

TransportInitial transport_preset_initial() {
  return [](double r1, double theta, double, double y) {
    if (std::abs(r1) >= 0.5) return 0.0;
    const double c = std::cos(std::numbers::pi * r1);
    return c * c * (1.0 + 0.5 * std::cos(theta)) * (1.0 + std::sin(two_pi * y));
  };
}

void write_transport_csv(std::ostream& out, const TransportField& field) {
  CsvTable table({"t", "r", "omega", "E", "value"});
  for (std::size_t t = 0; t < field.times.size(); ++t)
    for (std::size_t r = 0; r < field.r.size(); ++r)
      for (std::size_t o = 0; o < field.theta.size(); ++o)
        for (std::size_t e = 0; e < field.energies.size(); ++e)
          table.add_row({field.times[t], field.r[r], field.theta[o], field.energies[e], field.values[t][field.index(r, o, e)]});
  table.write(out);
}

}  // namespace homokin
