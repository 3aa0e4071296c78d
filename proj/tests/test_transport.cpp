#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "homokin/energy_boltzmann.hpp"
#include "homokin/errors.hpp"
#include "homokin/transport.hpp"

using namespace homokin;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

OpticalParameters isotropic(double sigma, double k1, double k2, double e_min, double e_max) {
  OpticalParameters p;
  p.sigma = [=](double, double, double) { return sigma; };
  p.kappa1 = [=](double, double) { return k1; };
  p.kappa2 = [=](double, double, double) { return k2; };
  p.e_min = e_min;
  p.e_max = e_max;
  return p;
}

TransportRun small_run(double T, std::size_t steps, std::size_t n_r) {
  TransportRun run;
  run.T = T;
  run.time_steps = steps;
  run.n_r = n_r;
  run.workers = 4;
  return run;
}

double max_diff(const TransportField& a, const TransportField& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.values.size(); ++t)
    for (std::size_t k = 0; k < a.values[t].size(); ++k) m = std::max(m, std::abs(a.values[t][k] - b.values[t][k]));
  return m;
}

}  // namespace

TEST_CASE("integrated scattering rates") {
  const auto zero = kappa_bars(isotropic(1.0, 0.0, 0.0, 0.25, 1.0), 0.1);
  for (double v : zero.bar) CHECK(v == 0.0);
  for (double v : zero.tilde) CHECK(v == 0.0);

  const TransportGrid g{8, 20};
  const auto iso = kappa_bars(isotropic(1.0, 1.0, 1.0, 0.0, 1.0), 0.1, g);
  const std::size_t ne = iso.energies.size();
  double mid_sqrt = 0.0;
  for (double e : iso.energies) mid_sqrt += std::sqrt(e) / static_cast<double>(ne);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t e = 0; e < ne; ++e) {
      CHECK(std::abs(iso.bar[i * ne + e] - two_pi * std::sqrt(iso.energies[e])) < 1e-12);
      CHECK(std::abs(iso.tilde[i * ne + e] - two_pi * mid_sqrt) < 1e-12);
    }

  // no oscillation in kappa2: kappa_bar(E) does not depend on eps
  auto p = isotropic(1.0, 0.0, 0.0, 0.25, 1.0);
  p.kappa1 = [](double mu, double e) { return (1.0 + e) * (1.0 + 0.3 * mu); };
  p.kappa2 = [](double mu, double e, double) { return 2.0 - e + mu * mu; };
  const auto a = kappa_bars(p, 1.0 / 4, g), b = kappa_bars(p, 1.0 / 8, g);
  auto scaled = [](const KappaBars& k, std::size_t e) { return k.bar[e] / (std::sqrt(k.energies[e]) * (1.0 + k.energies[e])); };
  for (std::size_t e = 0; e < a.energies.size(); ++e) CHECK(std::abs(scaled(a, e) - scaled(b, 0)) < 1e-12);
}

TEST_CASE("subcriticality margin") {
  const TransportGrid g{8, 32};
  const auto m = subcriticality_check(isotropic(2.0, 0.0, 0.0, 0.5, 1.0), 0.1, g);
  const double h = 0.5 / 160.0;
  CHECK(std::abs(m.margin - 2.0 * std::sqrt(0.5 + 0.5 * h)) < 1e-12);
  CHECK(std::abs(m.margin - std::sqrt(0.5) * 2.0) < 1e-2);
  CHECK(m.subcritical());

  const auto bad = subcriticality_check(isotropic(0.1, 1.0, 1.0, 0.25, 1.0), 0.1, g);
  CHECK(bad.margin < 0.0);
  CHECK_FALSE(bad.subcritical());

  auto p = transport_preset("transport-subcritical-1");
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const auto base = subcriticality_check(p, eps, g);
    CHECK(base.margin > 0.4);
    auto doubled = p;
    doubled.sigma = [s = p.sigma](double t, double e, double y) { return 2.0 * s(t, e, y); };
    CHECK(subcriticality_check(doubled, eps, g).margin >= base.margin + base.min_sigma - 1e-12);
  }
}

TEST_CASE("coercivity of the collision operator") {
  const TransportGrid g{8, 16};
  const auto k0 = transport_preset("transport-kappa0");
  const auto r0 = subcriticality_check(k0, 1.0 / 8, g);
  CHECK(coercivity_test(k0, 1.0 / 8, 50, 7, g) >= r0.min_sigma);

  const auto p = transport_preset("transport-subcritical-1");
  for (double eps : {1.0 / 8, 1.0 / 16}) {
    const auto r = subcriticality_check(p, eps, g);
    CHECK(coercivity_test(p, eps, 100, 2024, g) >= r.margin - 1e-6);
  }
  CHECK(coercivity_test(p, 0.125, 5, 99, g) == coercivity_test(p, 0.125, 5, 99, g));

  // constant f: quotient is the grid average of sigma^eps - kappa_bar
  const auto bars = kappa_bars(p, 0.125, g);
  const std::size_t ne = bars.energies.size();
  double avg = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t e = 0; e < ne; ++e) {
      const double en = bars.energies[e];
      avg += std::sqrt(en) * p.sigma(0.0, en, en / 0.125 - std::floor(en / 0.125)) - bars.bar[i * ne + e];
    }
  avg /= static_cast<double>(8 * ne);
  CHECK(std::abs(rayleigh_quotient(p, 0.125, std::vector<double>(8 * ne, 3.0), g) - avg) < 1e-12);
}

TEST_CASE("characteristics solver without scattering is pure decay") {
  const auto p = transport_preset("transport-kappa0");
  const auto phi = transport_preset_initial();
  const double eps = 1.0 / 8;
  const auto psi = solve_characteristics_eps(p, phi, eps, small_run(1.0, 50, 6), {6, 16});
  double err = 0.0;
  for (std::size_t t = 0; t < psi.times.size(); ++t)
    for (std::size_t r = 0; r < psi.r.size(); ++r)
      for (std::size_t o = 0; o < psi.theta.size(); ++o)
        for (std::size_t e = 0; e < psi.energies.size(); ++e) {
          const double en = psi.energies[e], y = en / eps - std::floor(en / eps);
          const double expect = phi(psi.r[r], psi.theta[o], en, y) * std::exp(-psi.times[t] * std::sqrt(en) * p.sigma(0.0, en, y));
          err = std::max(err, std::abs(psi.values[t][psi.index(r, o, e)] - expect));
        }
  CHECK(err < 1e-8);
}

TEST_CASE("angle-isotropic transport reduces to the energy model") {
  auto toy = example_preset(1, Placement::inside);
  toy.e_min = 0.25;
  toy.e_max = 1.0;
  toy.epsilon = 0.25;
  toy.points_per_period = 32;
  toy.T = 1.0;
  toy.time_steps = 2000;
  toy.rate_weight = [](double e) { return std::sqrt(e); };
  const auto ref = solve_toy_eps(toy);

  OpticalParameters p;
  p.e_min = 0.25;
  p.e_max = 1.0;
  p.sigma = [&](double, double, double y) { return toy.sigma(y); };
  p.kappa1 = [](double, double) { return 1.0 / two_pi; };
  p.kappa2 = [&](double, double, double y) { return toy.kappa(y); };
  auto run = small_run(1.0, 1000, 1);
  run.output_stride = 100;
  const auto psi = solve_characteristics_eps(p, [&](double, double, double, double y) { return toy.phi_in(y); }, 0.25,
                                             run, {4, 32});
  REQUIRE(psi.energies.size() == ref.energies.size());
  double err = 0.0;
  for (std::size_t s = 0; s < psi.times.size(); ++s) {
    const auto n = static_cast<std::size_t>(std::llround(psi.times[s] * 2000.0));
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t e = 0; e < psi.energies.size(); ++e)
        err = std::max(err, std::abs(psi.values[s][psi.index(0, o, e)] - ref.values[n][e]));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("characteristics solver: linearity, positivity, interior check") {
  const auto p = transport_preset("transport-subcritical-1");
  const auto phi1 = transport_preset_initial();
  const TransportInitial phi2 = [](double r, double th, double e, double y) {
    return std::abs(r) < 0.5 ? (0.25 - r * r) * (1.0 + std::sin(th)) * e * (1.0 + std::cos(2.0 * two_pi * y)) : 0.0;
  };
  const TransportInitial combo = [&](double r, double th, double e, double y) {
    return 2.0 * phi1(r, th, e, y) - 0.7 * phi2(r, th, e, y);
  };
  const auto run = small_run(1.0, 40, 4);
  const TransportGrid g{6, 16};
  const auto a = solve_characteristics_eps(p, phi1, 0.125, run, g);
  const auto b = solve_characteristics_eps(p, phi2, 0.125, run, g);
  const auto c = solve_characteristics_eps(p, combo, 0.125, run, g);
  double lin = 0.0, lowest = 0.0;
  for (std::size_t t = 0; t < c.values.size(); ++t)
    for (std::size_t k = 0; k < c.values[t].size(); ++k) {
      lin = std::max(lin, std::abs(c.values[t][k] - 2.0 * a.values[t][k] + 0.7 * b.values[t][k]));
      lowest = std::min({lowest, a.values[t][k], b.values[t][k]});
    }
  CHECK(lin < 1e-12);
  CHECK(lowest >= 0.0);

  auto too_long = run;
  too_long.T = 1.6;
  CHECK_THROWS_AS(solve_characteristics_eps(p, phi1, 0.125, too_long, g), ConfigError);
  CHECK_THROWS_AS(solve_characteristics_eps(p, phi1, 0.0, run, g), DomainError);
}

TEST_CASE("a-priori bound over the eps sweep") {
  const auto p = transport_preset("transport-subcritical-1");
  auto run = small_run(1.0, 50, 4);
  run.output_stride = 5;
  double lo = 1e300, hi = 0.0;
  for (double inv : {8.0, 16.0, 32.0}) {
    const double b = transport_linf_l2(solve_characteristics_eps(p, transport_preset_initial(), 1.0 / inv, run, {4, 16}));
    REQUIRE(std::isfinite(b));
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  CHECK(hi <= 1.05 * lo);
}

TEST_CASE("two-scale transport system") {
  const auto run = small_run(1.0, 200, 3);
  const TwoScaleTransportGrid g{4, 8, 64};

  // no scattering, sigma in {1, 3}: pointwise two-point average
  auto p = transport_preset("transport-kappa0");
  p.sigma = [](double, double, double y) { return y < 0.5 ? 1.0 : 3.0; };
  const TransportInitial phi = [](double r, double th, double e, double) {
    return std::abs(r) < 0.5 ? (1.0 + 0.5 * std::cos(th)) * (2.0 - e) : 0.0;
  };
  const auto two = solve_two_scale_transport(p, phi, run, g);
  CHECK(two.max_mean_rho <= 1e-10);
  const auto& f = two.psi_hom;
  double err = 0.0;
  for (std::size_t t = 0; t < f.times.size(); ++t)
    for (std::size_t r = 0; r < f.r.size(); ++r)
      for (std::size_t o = 0; o < f.theta.size(); ++o)
        for (std::size_t e = 0; e < f.energies.size(); ++e) {
          const double se = std::sqrt(f.energies[e]), tt = f.times[t];
          const double expect = phi(f.r[r], f.theta[o], f.energies[e], 0.0) * 0.5 * (std::exp(-se * tt) + std::exp(-3.0 * se * tt));
          err = std::max(err, std::abs(f.values[t][f.index(r, o, e)] - expect));
        }
  CHECK(err < 1e-9);

  // angle-isotropic data: the y-average of the energy toy two-scale limit with sqrt(E) rates
  auto toy = example_preset(1, Placement::inside);
  toy.e_min = 0.25;
  toy.e_max = 1.0;
  toy.rate_weight = [](double e) { return std::sqrt(e); };
  const auto toy_hom = solve_toy_two_scale(toy, TimeGrid(1.0, 200), {8, 64}).homogenized();
  OpticalParameters q;
  q.sigma = [&](double, double, double y) { return toy.sigma(y); };
  q.kappa1 = [](double, double) { return 1.0 / two_pi; };
  q.kappa2 = [&](double, double, double y) { return toy.kappa(y); };
  auto one = run;
  one.n_r = 1;
  const auto iso = solve_two_scale_transport(q, [&](double, double, double, double y) { return toy.phi_in(y); }, one, g);
  double diff = 0.0;
  for (std::size_t t = 0; t < iso.psi_hom.times.size(); ++t)
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t e = 0; e < 8; ++e)
        diff = std::max(diff, std::abs(iso.psi_hom.values[t][iso.psi_hom.index(0, o, e)] - toy_hom.values[t][e]));
  CHECK(diff < 1e-12);
  CHECK(iso.max_mean_rho <= 1e-10);

  // y-independent data: no fluctuation is generated
  auto flat = transport_preset("transport-subcritical-1");
  flat.sigma = [](double, double e, double) { return 1.5 + e; };
  flat.kappa2 = [](double mu, double, double) { return 1.0 + 0.2 * mu; };
  const TransportInitial flat_phi = [](double r, double th, double e, double) {
    return std::abs(r) < 0.5 ? (1.0 + 0.5 * std::cos(th)) * (1.0 + e) : 0.0;
  };
  const auto fl = solve_two_scale_transport(flat, flat_phi, run, g);
  CHECK(fl.max_mean_rho <= 1e-14);
}

TEST_CASE("memory-kernel route reproduces the two-scale system") {
  const auto p = transport_preset("transport-subcritical-1");
  const auto phi = transport_preset_initial();
  auto run = small_run(0.5, 200, 2);
  run.output_stride = 40;
  const TwoScaleTransportGrid g{6, 8, 32};
  const auto a = solve_two_scale_transport(p, phi, run, g);
  const auto b = solve_transport_memory_route(p, phi, run, g);
  CHECK(max_diff(a.psi_hom, b) < 1e-6);
}

TEST_CASE("weak error halves with eps") {
  const auto p = transport_preset("transport-subcritical-1");
  const auto phi = transport_preset_initial();
  auto run = small_run(1.0, 50, 3);
  run.output_stride = 10;
  const auto hom = solve_two_scale_transport(p, phi, run, {4, 16, 64});
  std::vector<double> errs;
  for (double inv : {8.0, 16.0, 32.0})
    errs.push_back(transport_weak_error(solve_characteristics_eps(p, phi, 1.0 / inv, run, {4, 32}), hom.psi_hom, p.e_min, p.e_max));
  for (std::size_t k = 1; k < errs.size(); ++k) {
    CAPTURE(errs[k - 1], errs[k]);
    CHECK(errs[k - 1] / errs[k] >= 1.5);
    CHECK(errs[k - 1] / errs[k] <= 3.0);
  }
}

TEST_CASE("presets and output") {
  CHECK_THROWS_AS(transport_preset("transport-critical"), ConfigError);
  auto run = small_run(0.2, 2, 1);
  const auto psi = solve_characteristics_eps(transport_preset("transport-kappa0"), transport_preset_initial(), 0.5, run, {2, 2});
  std::ostringstream out;
  write_transport_csv(out, psi);
  const auto text = out.str();
  CHECK(text.rfind("t,r,omega,E,value\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == 1 + 3 * 1 * 2 * psi.energies.size());
}
