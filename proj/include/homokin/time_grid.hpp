#pragma once

#include <cstddef>

namespace homokin {

// Uniform grid t_n = n dt, n = 0..count.
class TimeGrid {
 public:
  TimeGrid(double t_end, std::size_t count);
  // count = round(t_end/dt); dt must divide t_end to 1e-12.
  static TimeGrid from_step(double t_end, double dt);

  double t_end() const { return t_end_; }
  double dt() const { return dt_; }
  std::size_t count() const { return count_; }
  std::size_t points() const { return count_ + 1; }
  double time(std::size_t n) const { return static_cast<double>(n) * dt_; }

 private:
  double t_end_;
  double dt_;
  std::size_t count_;
};

}  // namespace homokin
