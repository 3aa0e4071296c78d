#pragma once

#include <cmath>
#include <numbers>

#include "homokin/cell_calculus.hpp"

namespace testsupport {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline homokin::CellFunction sine_sigma(std::size_t n) {
  return homokin::CellFunction::sample(homokin::PeriodicGrid(n),
                                       [](double y) { return 2.0 + 0.5 * std::sin(two_pi * y); });
}

// 1 on [0,1/2), 3 on [1/2,1)
inline homokin::CellFunction two_valued_sigma(std::size_t n) {
  return homokin::CellFunction::sample(homokin::PeriodicGrid(n), [](double y) { return y < 0.5 ? 1.0 : 3.0; });
}

}  // namespace testsupport
