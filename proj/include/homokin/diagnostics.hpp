#pragma once

#include <string>
#include <vector>

#include "homokin/fields.hpp"

namespace homokin {

struct ModeSeries {
  int k = 0;
  std::vector<double> times;
  std::vector<double> values;
};

// Legendre polynomial of degree k shifted to [a, b], orthonormal in L^2(a, b).
double shifted_legendre(int k, double e, double a, double b);

// Modes k = 0..count-1 (count in [1, 16]); inner products use the field's quadrature.
std::vector<ModeSeries> legendre_modes(const EnergyField& phi, int count = 8);

// max_t |m_k^eps(t) - m_k^hom(t)|, hom interpolated linearly onto the eps times.
double mode_error(const ModeSeries& eps_modes, const ModeSeries& hom_modes);

// | ||phi_eps||_{L2((0,T) x E)} - ||phi0||_{L2((0,T) x E x Y)} |, trapezoid in time.
double norm_difference(const EnergyField& phi_eps, const TwoScaleField& phi0);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |log e - fit| over the sweep
};

// Least-squares slope of log(error) against log(eps).
RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors);

struct ModeRate {
  int k = 0;
  bool fitted = false;
  RateFit fit;
  std::string note;  // why no fit was made
};

struct ConvergenceReport {
  std::vector<double> epsilons;             // strictly decreasing
  std::vector<std::vector<double>> errors;  // [k][eps]
  std::vector<ModeRate> rates;              // per k
  std::vector<double> norm_differences;     // per eps
};

// Errors below noise_floor carry no measurable rate; such modes are left unfitted.
inline constexpr double rate_noise_floor = 1e-12;

ConvergenceReport build_report(std::vector<double> epsilons, std::vector<std::vector<double>> errors,
                               std::vector<double> norm_differences, double noise_floor = rate_noise_floor);

bool strictly_decreasing(const std::vector<double>& v);

}  // namespace homokin
