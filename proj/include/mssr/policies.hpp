#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mssr/error.hpp"
#include "mssr/market.hpp"
#include "mssr/numeric.hpp"

namespace mssr {

// A deterministic commitment: rent at `shop` until the day before `buy_day`,
// then buy. No buy day means renting for the whole season.
struct Decision {
  std::size_t shop = 1;
  std::optional<Day> buy_day;

  bool buys() const noexcept { return buy_day.has_value(); }
  friend bool operator==(const Decision&, const Decision&) = default;
};

// Commit to `shop` and draw the buy day from {1..K} with probability mass[j-1].
struct RandomizedPolicy {
  std::size_t shop = 1;
  std::vector<double> mass;
  // Set when the support size formula produced 0 and was raised to 1.
  bool clamped = false;

  Day support_end() const noexcept { return static_cast<Day>(mass.size()); }
};

using Plan = std::variant<Decision, RandomizedPolicy>;

// Sorted, nonnegative predictions of the number of skiing days.
class PredictionSet {
 public:
  explicit PredictionSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "prediction set must be nonempty");
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidArgument, "predictions must be finite and >= 0");
      }
    }
    std::stable_sort(values_.begin(), values_.end());
  }
  PredictionSet(std::initializer_list<double> values)
      : PredictionSet(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double front() const noexcept { return values_.front(); }

  // Largest |y_i - x|.
  double error(Day x) const noexcept {
    const double xd = static_cast<double>(x);
    return std::max(std::abs(values_.front() - xd), std::abs(values_.back() - xd));
  }

 private:
  std::vector<double> values_;
};

inline void require_lambda_open(double lambda, double lo, double hi) {
  if (!(lambda > lo && lambda < hi)) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda must be in (" << lo << "," << hi << "), got " << lambda;
    throw Error(ErrorKind::kLambdaOutOfRange, os.str());
  }
}

inline void require_prediction(double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) {
    throw Error(ErrorKind::kInvalidArgument, "prediction must be finite and >= 0");
  }
}

inline double decision_cost(const Market& market, const Decision& d, Day x) {
  require_day(x);
  const double r = market.rent(d.shop);
  if (!d.buy_day || x < *d.buy_day) return static_cast<double>(x) * r;
  return static_cast<double>(*d.buy_day - 1) * r + market.buy(d.shop);
}

// Best deterministic online algorithm without predictions: break-even day
// ceil(b_n) at the shop minimizing r_i + (b_i - r_i) / b_n.
inline Decision bdoa(const Market& market) {
  const double bn = market.bn();
  std::size_t best = 1;
  double best_value = market.rent(1) + (market.buy(1) - market.rent(1)) / bn;
  for (std::size_t i = 2; i <= market.n(); ++i) {
    const double v = market.rent(i) + (market.buy(i) - market.rent(i)) / bn;
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, static_cast<Day>(snapped_ceil(bn))};
}

inline Decision simple_single(const Market& market, double y) {
  require_prediction(y);
  if (y >= market.bn()) return {market.n(), Day{1}};
  return {1, std::nullopt};
}

inline Decision det_single(const Market& market, double y, double lambda) {
  require_lambda_open(lambda, 0.0, 1.0);
  require_prediction(y);
  if (y >= market.bn()) {
    return {market.n(), static_cast<Day>(snapped_ceil(lambda * market.bn()))};
  }
  return {1, static_cast<Day>(snapped_ceil(market.b1() / lambda))};
}

// Buy-day mass proportional to ((b - r) / b)^(K - i) on {1..K}: later days are
// likelier, with ratio b / (b - r) between consecutive days.
inline std::vector<double> geometric_mass(double rent, double buy, Day k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "support size must be >= 1");
  if (!(rent < buy)) {
    throw Error(ErrorKind::kDegeneratePrices,
                "randomized policy needs rent < buy at the chosen shop");
  }
  const double ratio = (buy - rent) / buy;
  std::vector<double> mass(static_cast<std::size_t>(k));
  CompensatedSum total;
  for (Day i = 1; i <= k; ++i) {
    const double w = std::pow(ratio, static_cast<double>(k - i));
    mass[static_cast<std::size_t>(i - 1)] = w;
    total.add(w);
  }
  const double norm = total.value();
  for (double& m : mass) m /= norm;
  return mass;
}

inline RandomizedPolicy rand_single(const Market& market, double y, double lambda) {
  require_lambda_open(lambda, 1.0 / market.bn(), 1.0);
  require_prediction(y);
  if (y >= market.bn()) {
    const auto k = static_cast<Day>(snapped_floor(lambda * market.bn()));
    return {market.n(), geometric_mass(market.rn(), market.bn(), k), false};
  }
  const auto l = static_cast<Day>(snapped_ceil(market.b1() / lambda));
  return {1, geometric_mass(market.rent(1), market.b1(), l), false};
}

// Number of predictions at or above `threshold`.
inline std::size_t count_above(const PredictionSet& predictions, double threshold) {
  const auto v = predictions.values();
  return static_cast<std::size_t>(
      v.end() - std::lower_bound(v.begin(), v.end(), threshold));
}

// Majority vote over the predictions. `plus_one` keeps the break-even
// denominators away from zero; turning it off is only for comparison runs.
inline Decision det_multi(const Market& market, const PredictionSet& predictions,
                          double lambda, bool plus_one = true) {
  require_lambda_open(lambda, 0.0, 1.0);
  const auto m = static_cast<long long>(predictions.size());
  const auto z = static_cast<long long>(count_above(predictions, market.bn()));
  const long long c = plus_one ? 1 : 0;
  if (2 * z >= m) {
    const long long denom = 2 * z - m + c;
    if (denom == 0) {
      throw Error(ErrorKind::kZeroDenominator,
                  "2z - m = 0 with plus_one disabled (m=" + std::to_string(m) +
                      ", z=" + std::to_string(z) + ")");
    }
    return {market.n(), static_cast<Day>(snapped_ceil(
                            lambda * market.bn() / static_cast<double>(denom)))};
  }
  const long long num = m - 2 * z + c;
  return {1, static_cast<Day>(snapped_ceil(static_cast<double>(num) * market.bn() / lambda))};
}

inline RandomizedPolicy rand_multi(const Market& market, const PredictionSet& predictions,
                                   double lambda) {
  require_lambda_open(lambda, 0.0, 1.0);
  const auto m = static_cast<long long>(predictions.size());
  const auto z = static_cast<long long>(count_above(predictions, market.bn()));
  if (2 * z >= m) {
    auto k = static_cast<Day>(snapped_floor(lambda * market.bn() /
                                            static_cast<double>(2 * z - m + 1)));
    const bool clamped = k < 1;
    if (clamped) k = 1;
    return {market.n(), geometric_mass(market.rn(), market.bn(), k), clamped};
  }
  const auto l = static_cast<Day>(
      snapped_ceil(static_cast<double>(m - 2 * z + 1) * market.b1() / lambda));
  return {1, geometric_mass(market.rent(1), market.b1(), l), false};
}

// Exact expectation over the policy's buy-day distribution.
inline double expected_cost(const RandomizedPolicy& policy, const Market& market, Day x) {
  require_day(x);
  const double r = market.rent(policy.shop);
  const double b = market.buy(policy.shop);
  const Day k = policy.support_end();
  CompensatedSum total;
  for (Day i = 1; i <= k; ++i) {
    const double p = policy.mass[static_cast<std::size_t>(i - 1)];
    const double cost = i <= x ? b + static_cast<double>(i - 1) * r
                               : static_cast<double>(x) * r;
    total.add(cost * p);
  }
  return total.value();
}

// Inverse-CDF draw; `u` is uniform on [0, 1).
inline Day sample_buy_day(const RandomizedPolicy& policy, double u) {
  double cdf = 0.0;
  const Day k = policy.support_end();
  for (Day i = 1; i < k; ++i) {
    cdf += policy.mass[static_cast<std::size_t>(i - 1)];
    if (u < cdf) return i;
  }
  return k;
}

inline double plan_cost(const Market& market, const Plan& plan, Day x) {
  if (const auto* d = std::get_if<Decision>(&plan)) return decision_cost(market, *d, x);
  return expected_cost(std::get<RandomizedPolicy>(plan), market, x);
}

inline std::size_t plan_shop(const Plan& plan) {
  return std::visit([](const auto& p) { return p.shop; }, plan);
}

// ---------------------------------------------------------------------------
// Algorithm registry shared by the analysis harness, experiments and CLI.

enum class Algorithm {
  kBdoa,
  kSimple,
  kDet,
  kRand,
  kDetMulti,
  kDetMultiNoPlus,
  kRandMulti,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::kBdoa,     Algorithm::kSimple,         Algorithm::kDet,
    Algorithm::kRand,     Algorithm::kDetMulti,       Algorithm::kDetMultiNoPlus,
    Algorithm::kRandMulti};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBdoa: return "bdoa";
    case Algorithm::kSimple: return "simple";
    case Algorithm::kDet: return "det";
    case Algorithm::kRand: return "rand";
    case Algorithm::kDetMulti: return "det-multi";
    case Algorithm::kDetMultiNoPlus: return "det-multi-noplus";
    case Algorithm::kRandMulti: return "rand-multi";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

inline bool uses_lambda(Algorithm a) noexcept {
  return a != Algorithm::kBdoa && a != Algorithm::kSimple;
}

inline bool uses_predictions(Algorithm a) noexcept { return a != Algorithm::kBdoa; }

inline bool is_multi(Algorithm a) noexcept {
  return a == Algorithm::kDetMulti || a == Algorithm::kDetMultiNoPlus ||
         a == Algorithm::kRandMulti;
}

inline bool is_randomized(Algorithm a) noexcept {
  return a == Algorithm::kRand || a == Algorithm::kRandMulti;
}

// Open interval of admissible lambda values for `a` on `market`.
inline std::pair<double, double> lambda_range(Algorithm a, const Market& market) {
  if (a == Algorithm::kRand) return {1.0 / market.bn(), 1.0};
  return {0.0, 1.0};
}

inline bool lambda_valid(Algorithm a, const Market& market, double lambda) {
  if (!uses_lambda(a)) return true;
  const auto [lo, hi] = lambda_range(a, market);
  return lambda > lo && lambda < hi;
}

// Single-prediction algorithms read the smallest prediction; callers pass a
// one-element set for them.
inline Plan make_plan(Algorithm a, const Market& market, const PredictionSet& predictions,
                      double lambda) {
  switch (a) {
    case Algorithm::kBdoa: return bdoa(market);
    case Algorithm::kSimple: return simple_single(market, predictions.front());
    case Algorithm::kDet: return det_single(market, predictions.front(), lambda);
    case Algorithm::kRand: return rand_single(market, predictions.front(), lambda);
    case Algorithm::kDetMulti: return det_multi(market, predictions, lambda, true);
    case Algorithm::kDetMultiNoPlus: return det_multi(market, predictions, lambda, false);
    case Algorithm::kRandMulti: return rand_multi(market, predictions, lambda);
  }
  throw Error(ErrorKind::kInvalidArgument, "unhandled algorithm");
}

}  // namespace mssr
