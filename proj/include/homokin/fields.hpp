#pragma once

#include <cstddef>
#include <vector>

namespace homokin {

// phi(t, E) with its own energy quadrature.
struct EnergyField {
  double e_min = 0.0;
  double e_max = 1.0;
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> weights;
  std::vector<std::vector<double>> values;  // [t][E]
};

// phi0(t, E, y) on an energy quadrature times the midpoint cell grid.
struct TwoScaleField {
  double e_min = 0.0;
  double e_max = 1.0;
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> weights;
  std::size_t n_cell = 0;
  std::vector<std::vector<double>> values;  // [t][i * n_cell + j]

  double at(std::size_t t, std::size_t i, std::size_t j) const { return values[t][i * n_cell + j]; }
  // y-average, carried on the same energy quadrature
  EnergyField homogenized() const;
};

}  // namespace homokin
