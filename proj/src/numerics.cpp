#include "homokin/numerics.hpp"

#include <cmath>
#include <numbers>

#include "homokin/errors.hpp"

namespace homokin {

namespace {

// phi1(z) = (1 - e^{-z})/z, phi2(z) = (1 - e^{-z}(1+z))/z^2
void phis(double z, double& phi1, double& phi2) {
  if (std::abs(z) < 1e-3) {
    phi1 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    phi2 = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0;
    return;
  }
  const double em1 = -std::expm1(-z);  // 1 - e^{-z}
  phi1 = em1 / z;
  phi2 = (em1 - z * std::exp(-z)) / (z * z);
}

}  // namespace

ExpWeights exp_weights(double rate, double dt) {
  const double z = rate * dt;
  double phi1 = 0.0, phi2 = 0.0;
  phis(z, phi1, phi2);
  return {std::exp(-z), dt * phi2, dt * (phi1 - phi2)};
}

GaussRule gauss_legendre(std::size_t count, double a, double b) {
  if (count == 0) throw DomainError("gauss_legendre: count must be positive");
  GaussRule rule{std::vector<double>(count), std::vector<double>(count)};
  const auto n = static_cast<double>(count);
  for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= count; ++k) {
        const auto kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    rule.nodes[i] = mid - half * x;
    rule.nodes[count - 1 - i] = mid + half * x;
    rule.weights[i] = rule.weights[count - 1 - i] = half * w;
  }
  return rule;
}

double periodic_interpolate(std::span<const double> values, double y) {
  const auto n = static_cast<double>(values.size());
  double s = y * n - 0.5;  // position in node units
  s -= n * std::floor(s / n);
  auto j = static_cast<std::size_t>(std::floor(s));
  const double frac = s - static_cast<double>(j);
  j %= values.size();
  const std::size_t k = (j + 1) % values.size();
  return (1.0 - frac) * values[j] + frac * values[k];
}

}  // namespace homokin
