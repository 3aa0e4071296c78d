#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace homokin {

// Angles theta on S^1 (omega = (cos theta, sin theta)), mu = omega . omega'.
// The sqrt(E) factors are applied where the coefficients are used:
//   sigma^eps = sqrt(E) sigma(theta, E, E/eps)
//   kappa^eps = sqrt(E) kappa1(mu, E) kappa2(mu, E', E'/eps)
struct OpticalParameters {
  std::function<double(double theta, double e, double y)> sigma;
  std::function<double(double mu, double e)> kappa1;
  std::function<double(double mu, double e_prime, double y_prime)> kappa2;
  double e_min = 0.25;
  double e_max = 1.0;
  double alpha_target = 0.0;
};

// phi_in(r1, theta, E, y) on the r-line r = (r1, 0); 1-periodic in y.
using TransportInitial = std::function<double(double r1, double theta, double e, double y)>;

struct AngleGrid {
  explicit AngleGrid(std::size_t n);
  std::size_t size() const { return n; }
  double theta(std::size_t i) const;
  double weight() const;
  // mu for an angle-index difference d (exact cosine)
  double mu(std::size_t d) const;
  std::size_t n;
};

// Midpoint energy mesh for an eps-problem: points_per_period cells per eps-period.
struct TransportEnergyMesh {
  double e_min;
  double h;
  std::size_t cells;
  double node(std::size_t i) const { return e_min + (static_cast<double>(i) + 0.5) * h; }
};
TransportEnergyMesh transport_energy_mesh(const OpticalParameters& params, double epsilon,
                                          std::size_t points_per_period);

struct KappaBars {
  std::size_t n_omega;
  std::vector<double> energies;
  std::vector<double> bar;    // [omega * n_E + e]
  std::vector<double> tilde;  // [omega * n_E + e]
};

struct TransportGrid {
  std::size_t n_omega = 16;
  std::size_t points_per_period = 32;  // eps-problem energy mesh
};

KappaBars kappa_bars(const OpticalParameters& params, double epsilon, const TransportGrid& grid = {});

struct SubcriticalityReport {
  double margin;     // min over the grid of min(sigma^eps - kappa_bar, sigma^eps - kappa_tilde)
  double min_sigma;  // min over the grid of sigma^eps
  bool subcritical() const { return margin > 0.0; }
};
SubcriticalityReport subcriticality_check(const OpticalParameters& params, double epsilon,
                                          const TransportGrid& grid = {});

// Min of (Q f, f)/|f|^2 over `trials` seeded uniform(-1, 1) grid functions.
double coercivity_test(const OpticalParameters& params, double epsilon, std::size_t trials, std::uint64_t seed,
                       const TransportGrid& grid = {});
// (Q f, f)/|f|^2 for one grid function f[omega * n_E + e].
double rayleigh_quotient(const OpticalParameters& params, double epsilon, const std::vector<double>& f,
                         const TransportGrid& grid = {});

// psi(t, r1, theta, E) with values[t][(r * n_omega + omega) * n_E + e].
struct TransportField {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> theta;
  std::vector<double> energies;
  std::vector<double> energy_weights;
  std::vector<std::vector<double>> values;

  std::size_t index(std::size_t r_i, std::size_t omega, std::size_t e) const {
    return (r_i * theta.size() + omega) * energies.size() + e;
  }
};

struct TransportRun {
  double T = 1.0;
  std::size_t time_steps = 100;
  std::size_t output_stride = 1;  // store every output_stride-th step (and the last)
  std::size_t n_r = 32;
  double support_radius = 0.5;    // phi_in vanishes for |r1| > support_radius
  double r_box = 2.0;
  std::size_t workers = 1;
};

// Throws ConfigError unless support_radius + sqrt(E_max) T <= r_box.
void check_interior(const OpticalParameters& params, const TransportRun& run);

// Midpoints of [-support_radius, support_radius].
std::vector<double> r_nodes(const TransportRun& run);

// psi = phi_in e^{-t sigma} + int_0^t e^{-(t-s) sigma} (K psi)(s) ds per r-slice, with
// exponential product-trapezoid weights; the implicit end value is resolved by fixed-point iteration.
TransportField solve_characteristics_eps(const OpticalParameters& params, const TransportInitial& phi_in,
                                         double epsilon, const TransportRun& run, const TransportGrid& grid = {});

struct TwoScaleTransportGrid {
  std::size_t n_omega = 16;
  std::size_t n_energy = 32;  // Gauss-Legendre nodes on (E_min, E_max)
  std::size_t n_cell = 128;
};

struct TwoScaleTransport {
  TransportField psi_hom;
  double max_mean_rho = 0.0;  // max over t, r, omega, E of |<rho>|
};

// RK4 on the coupled (psi_hom, rho) system.
TwoScaleTransport solve_two_scale_transport(const OpticalParameters& params, const TransportInitial& phi_in,
                                            const TransportRun& run, const TwoScaleTransportGrid& grid = {});

// psi_hom from the closed memory-kernel equation (rho eliminated by its Duhamel formula).
TransportField solve_transport_memory_route(const OpticalParameters& params, const TransportInitial& phi_in,
                                            const TransportRun& run, const TwoScaleTransportGrid& grid = {});

// sup over stored times, r and omega of |int_a^b (psi^eps - psi_hom) dE|; psi_hom is
// interpolated in E from its Gauss nodes onto the eps mesh.
double transport_weak_error(const TransportField& eps, const TransportField& hom, double a, double b);

// sup over t of (sum over r, omega, E of w psi^2)^{1/2}
double transport_linf_l2(const TransportField& field);

OpticalParameters transport_preset(const std::string& name);
TransportInitial transport_preset_initial();

void write_transport_csv(std::ostream& out, const TransportField& field);

}  // namespace homokin
