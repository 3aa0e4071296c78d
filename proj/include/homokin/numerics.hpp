#pragma once

#include <span>
#include <vector>

namespace homokin {

// Product-integration weights for int_0^dt e^{-rate (dt-s)} g(s) ds with g
// linear between g(0) and g(dt): result = w0 g(0) + w1 g(dt).
struct ExpWeights {
  double decay;  // e^{-rate dt}
  double w0;
  double w1;
};
ExpWeights exp_weights(double rate, double dt);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
// Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(std::size_t count, double a, double b);

// Periodic linear interpolation of samples on the midpoint cell grid at y (any real).
double periodic_interpolate(std::span<const double> values, double y);

}  // namespace homokin
