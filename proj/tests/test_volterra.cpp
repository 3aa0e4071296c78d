#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "homokin/errors.hpp"
#include "homokin/volterra.hpp"

using namespace homokin;

namespace {

std::vector<double> exp_kernel(const TimeGrid& g, std::size_t extra = 0) {
  std::vector<double> k(g.points() + extra);
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = std::exp(-2.0 * g.dt() * static_cast<double>(j));
  return k;
}

double two_valued_error(std::size_t count) {
  const TimeGrid g(10.0, count);
  const auto sol = solve_volterra(scalar_problem(2.0, exp_kernel(g), {}, 1.0), g);
  double err = 0.0;
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    const double t = sol.times[n];
    err = std::max(err, std::abs(sol.values[n](0) - 0.5 * (std::exp(-t) + std::exp(-3.0 * t))));
  }
  return err;
}

}  // namespace

TEST_CASE("time grid") {
  const auto g = TimeGrid::from_step(10.0, 1e-3);
  CHECK(g.count() == 10000);
  CHECK(std::abs(g.dt() * static_cast<double>(g.count()) - 10.0) < 1e-12);
  CHECK_THROWS_AS(TimeGrid::from_step(1.0, 0.3), DomainError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), DomainError);
}

TEST_CASE("pure decay") {
  const TimeGrid g(5.0, 5000);
  const auto sol = solve_volterra(scalar_problem(2.0, {}, {}, 1.0), g);
  double err = 0.0;
  for (std::size_t n = 0; n < sol.times.size(); ++n)
    err = std::max(err, std::abs(sol.values[n](0) - std::exp(-2.0 * sol.times[n])));
  CHECK(err <= 1e-5);
}

TEST_CASE("two-valued memory problem and its residual") {
  CHECK(two_valued_error(10000) <= 1e-5);
  const TimeGrid g(10.0, 10000);
  const auto p = scalar_problem(2.0, exp_kernel(g), {}, 1.0);
  const auto sol = solve_volterra(p, g);
  CHECK(volterra_residual(p, sol.values, g) <= 1e-4);
}

TEST_CASE("second order in dt") {
  const double e1 = two_valued_error(500);
  const double e2 = two_valued_error(1000);
  const double e3 = two_valued_error(2000);
  CHECK(e1 / e2 >= 3.5);
  CHECK(e1 / e2 <= 4.5);
  CHECK(e2 / e3 >= 3.5);
  CHECK(e2 / e3 <= 4.5);
}

TEST_CASE("kernel-free rotation") {
  // du/dt + A u = 0 gives u = e^{-tA} u0 = (cos t, sin t)
  const TimeGrid g(5.0, 5000);
  MatrixVolterra p;
  p.decay << 0.0, 1.0, -1.0, 0.0;
  p.u0 << 1.0, 0.0;
  const auto sol = solve_volterra(p, g);
  double err = 0.0;
  for (std::size_t n = 0; n < sol.times.size(); ++n) {
    const double t = sol.times[n];
    err = std::max({err, std::abs(sol.values[n](0) - std::cos(t)), std::abs(sol.values[n](1) - std::sin(t))});
  }
  CHECK(err <= 1e-5);
}

TEST_CASE("residual of injected exact solution") {
  for (std::size_t count : {200u, 400u}) {
    const TimeGrid g(4.0, count);
    const auto p = scalar_problem(2.0, exp_kernel(g), {}, 1.0);
    std::vector<ScalarVolterra::Vector> u(g.points());
    for (std::size_t n = 0; n < u.size(); ++n) {
      const double t = g.time(n);
      u[n](0) = 0.5 * (std::exp(-t) + std::exp(-3.0 * t));
    }
    CHECK(volterra_residual(p, u, g) <= 10.0 * g.dt() * g.dt());
  }
  const TimeGrid g(1.0, 10);
  std::vector<ScalarVolterra::Vector> zero(g.points(), ScalarVolterra::Vector::Zero());
  CHECK(volterra_residual(scalar_problem(1.0, exp_kernel(g), {}, 0.0), zero, g) == 0.0);
}

TEST_CASE("linearity and zero padding") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  const TimeGrid g(3.0, 300);
  std::vector<double> kernel(g.points()), src(g.points());
  for (std::size_t j = 0; j < kernel.size(); ++j) {
    kernel[j] = std::exp(-0.5 * g.time(j)) * std::cos(3.0 * g.time(j));
    src[j] = std::sin(g.time(j)) + 0.1 * nd(rng);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const double alpha = 3.0 * nd(rng);
    std::vector<double> scaled(src);
    for (auto& v : scaled) v *= alpha;
    const auto base = scalar_values(solve_volterra(scalar_problem(1.3, kernel, src, 0.4), g));
    const auto sc = scalar_values(solve_volterra(scalar_problem(1.3, kernel, scaled, 0.4 * alpha), g));
    for (std::size_t n = 0; n < base.size(); ++n) CHECK(std::abs(sc[n] - alpha * base[n]) <= 1e-12 * (1.0 + std::abs(alpha * base[n])));
  }
  std::vector<double> padded(kernel);
  padded.resize(kernel.size() + 50, 0.0);
  const auto a = scalar_values(solve_volterra(scalar_problem(1.3, kernel, src, 0.4), g));
  const auto b = scalar_values(solve_volterra(scalar_problem(1.3, padded, src, 0.4), g));
  CHECK(a == b);
}

TEST_CASE("inconsistent problems are rejected") {
  const TimeGrid g(1.0, 10);
  CHECK_THROWS_AS(solve_volterra(scalar_problem(1.0, {1.0, 1.0}, {}, 1.0), g), DimensionError);
  // 1 + dt a/2 - dt^2 K0/4 = 0
  CHECK_THROWS_AS(solve_volterra(scalar_problem(-20.0, {}, {}, 1.0), g), SolverError);
}
