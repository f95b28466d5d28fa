#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace mssr {

// Neumaier-compensated running sum. Used wherever a result must not depend
// on how many terms were folded in or in which magnitude order.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

// Integer rounding that absorbs representation error in products such as
// 0.3 * 80 = 24.000000000000004, which must round to 24.
namespace detail {
inline constexpr double kIntegerSnap = 1e-9;

inline double snap(double v) noexcept {
  const double r = std::round(v);
  return std::abs(v - r) <= kIntegerSnap * std::max(1.0, std::abs(v)) ? r : v;
}
}  // namespace detail

inline double snapped_ceil(double v) noexcept { return std::ceil(detail::snap(v)); }
inline double snapped_floor(double v) noexcept { return std::floor(detail::snap(v)); }

}  // namespace mssr
