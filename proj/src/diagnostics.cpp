#include "homokin/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "homokin/errors.hpp"

namespace homokin {

double shifted_legendre(int k, double e, double a, double b) {
  if (k < 0) throw DomainError("shifted_legendre: negative degree");
  const double len = b - a;
  const double x = 2.0 * (e - a) / len - 1.0;
  double p0 = 1.0, p1 = x;
  if (k == 0) p1 = 1.0;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt((2.0 * k + 1.0) / len) * p1;
}

std::vector<ModeSeries> legendre_modes(const EnergyField& phi, int count) {
  if (count < 1 || count > 16) throw DomainError("legendre_modes: mode count must lie in [1, 16]");
  if (phi.energies.size() != phi.weights.size()) throw DimensionError("legendre_modes: quadrature mismatch");
  std::vector<ModeSeries> modes(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    auto& m = modes[static_cast<std::size_t>(k)];
    m.k = k;
    m.times = phi.times;
    std::vector<double> basis(phi.energies.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
      basis[i] = phi.weights[i] * shifted_legendre(k, phi.energies[i], phi.e_min, phi.e_max);
    for (const auto& row : phi.values) {
      if (row.size() != basis.size()) throw DimensionError("legendre_modes: field row length mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < basis.size(); ++i) s += basis[i] * row[i];
      m.values.push_back(s);
    }
  }
  return modes;
}

double mode_error(const ModeSeries& eps_modes, const ModeSeries& hom_modes) {
  if (eps_modes.k != hom_modes.k) throw DimensionError("mode_error: mode index mismatch");
  const auto& th = hom_modes.times;
  if (th.empty() || th.size() != hom_modes.values.size()) throw DimensionError("mode_error: empty reference series");
  double worst = 0.0;
  for (std::size_t n = 0; n < eps_modes.times.size(); ++n) {
    const double t = eps_modes.times[n];
    double ref;
    if (t <= th.front()) {
      ref = hom_modes.values.front();
    } else if (t >= th.back()) {
      ref = hom_modes.values.back();
    } else {
      const auto it = std::upper_bound(th.begin(), th.end(), t);
      const auto j = static_cast<std::size_t>(it - th.begin());
      const double a = (t - th[j - 1]) / (th[j] - th[j - 1]);
      ref = (1.0 - a) * hom_modes.values[j - 1] + a * hom_modes.values[j];
    }
    worst = std::max(worst, std::abs(eps_modes.values[n] - ref));
  }
  return worst;
}

namespace {

double time_trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t n = 1; n < t.size(); ++n) s += 0.5 * (t[n] - t[n - 1]) * (v[n] + v[n - 1]);
  return s;
}

}  // namespace

double norm_difference(const EnergyField& phi_eps, const TwoScaleField& phi0) {
  std::vector<double> a(phi_eps.times.size()), b(phi0.times.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi_eps.energies.size(); ++i)
      s += phi_eps.weights[i] * phi_eps.values[n][i] * phi_eps.values[n][i];
    a[n] = s;
  }
  for (std::size_t n = 0; n < b.size(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi0.energies.size(); ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j < phi0.n_cell; ++j) c += phi0.at(n, i, j) * phi0.at(n, i, j);
      s += phi0.weights[i] * c / static_cast<double>(phi0.n_cell);
    }
    b[n] = s;
  }
  return std::abs(std::sqrt(time_trapezoid(phi_eps.times, a)) - std::sqrt(time_trapezoid(phi0.times, b)));
}

RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors) {
  if (epsilons.size() != errors.size()) throw DimensionError("fit_rate: length mismatch");
  if (epsilons.size() < 3) throw DomainError("fit_rate: needs at least 3 sweep points");
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!(errors[i] > 0.0) || !(epsilons[i] > 0.0)) throw DomainError("fit_rate: cannot fit nonpositive values");
  const auto n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    sx += std::log(epsilons[i]);
    sy += std::log(errors[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = std::log(epsilons[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_rate: epsilons must not all coincide");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < errors.size(); ++i)
    f.residual = std::max(f.residual, std::abs(std::log(errors[i]) - (f.intercept + f.slope * std::log(epsilons[i]))));
  return f;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

ConvergenceReport build_report(std::vector<double> epsilons, std::vector<std::vector<double>> errors,
                               std::vector<double> norm_differences, double noise_floor) {
  if (!strictly_decreasing(epsilons)) throw DomainError("ConvergenceReport: epsilons must be strictly decreasing");
  for (const auto& row : errors) {
    if (row.size() != epsilons.size()) throw DimensionError("ConvergenceReport: error row length mismatch");
    for (double e : row)
      if (e < 0.0) throw DomainError("ConvergenceReport: negative error");
  }
  ConvergenceReport r{std::move(epsilons), std::move(errors), {}, std::move(norm_differences)};
  for (std::size_t k = 0; k < r.errors.size(); ++k) {
    ModeRate m;
    m.k = static_cast<int>(k);
    const auto& row = r.errors[k];
    if (row.size() < 3) {
      m.note = "fewer than 3 sweep points";
    } else if (*std::min_element(row.begin(), row.end()) < noise_floor) {
      m.note = "errors at the roundoff floor, no measurable rate";
    } else {
      m.fitted = true;
      m.fit = fit_rate(r.epsilons, row);
    }
    r.rates.push_back(m);
  }
  return r;
}

}  // namespace homokin
