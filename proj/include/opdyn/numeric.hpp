#pragma once

#include <cmath>
#include <cstddef>

namespace opdyn {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Rows at least this long are accumulated with compensation.
inline constexpr std::size_t kCompensatedRowLength = 1000;

}  // namespace opdyn
