#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mssr/error.hpp"
#include "mssr/market.hpp"
#include "mssr/numeric.hpp"

namespace mssr {

// Probability mass over the days 1..E.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.empty()) throw Error(ErrorKind::kEmptyDistribution, "distribution has no support");
    for (double p : mass_) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::kInvalidArgument, "probabilities must be finite and >= 0");
      }
    }
    const double total = compensated_sum(mass_);
    if (!(std::abs(total - 1.0) <= 1e-12)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "probabilities must sum to 1 (got " + std::to_string(total) + ")");
    }
    cdf_.resize(mass_.size());
    CompensatedSum running;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      running.add(mass_[i]);
      cdf_[i] = running.value();
    }
  }

  Day support_end() const noexcept { return static_cast<Day>(mass_.size()); }
  const std::vector<double>& mass() const noexcept { return mass_; }
  double probability(Day day) const {
    return day >= 1 && day <= support_end() ? mass_[static_cast<std::size_t>(day - 1)] : 0.0;
  }

  // Inverse CDF for u uniform on [0, 1); zero-mass days are never returned.
  Day sample(double u) const noexcept {
    for (std::size_t i = 0; i + 1 < cdf_.size(); ++i) {
      if (u < cdf_[i] && mass_[i] > 0.0) return static_cast<Day>(i + 1);
    }
    for (std::size_t i = mass_.size(); i-- > 0;) {
      if (mass_[i] > 0.0) return static_cast<Day>(i + 1);
    }
    return support_end();
  }

  friend bool operator==(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    return a.mass_ == b.mass_;
  }

 private:
  std::vector<double> mass_;
  std::vector<double> cdf_;
};

}  // namespace mssr
