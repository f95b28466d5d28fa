#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mssr/error.hpp"

namespace mssr {

// Skiing days are positive integers throughout.
using Day = std::int64_t;

struct Shop {
  double rent = 0.0;
  double buy = 0.0;

  friend bool operator==(const Shop&, const Shop&) = default;
};

struct RawShop {
  double rent = 0.0;
  double buy = 0.0;

  friend bool operator==(const RawShop&, const RawShop&) = default;
};

inline void require_day(Day x) {
  if (x < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "number of days must be >= 1, got " + std::to_string(x));
  }
}

// An immutable multi-shop instance in normalized units (cheapest rent == 1).
// Shops are 1-indexed: shop(1) has the lowest rent and the highest buy price,
// shop(n()) the highest rent and the lowest buy price.
class Market {
 public:
  std::size_t n() const noexcept { return shops_.size(); }
  const Shop& shop(std::size_t i) const { return shops_.at(i - 1); }
  double rent(std::size_t i) const { return shop(i).rent; }
  double buy(std::size_t i) const { return shop(i).buy; }
  std::span<const Shop> shops() const noexcept { return shops_; }

  // Original r_1; multiply a normalized cost by this to get currency.
  double scale() const noexcept { return scale_; }

  double b1() const noexcept { return shops_.front().buy; }
  double bn() const noexcept { return shops_.back().buy; }
  double rn() const noexcept { return shops_.back().rent; }

  double denormalize(double cost) const noexcept { return cost * scale_; }

  // Prices as supplied, in shop order.
  std::span<const RawShop> raw() const noexcept { return raw_; }

  friend bool operator==(const Market&, const Market&) = default;

 private:
  Market(std::vector<Shop> shops, std::vector<RawShop> raw, double scale)
      : shops_(std::move(shops)), raw_(std::move(raw)), scale_(scale) {}

  friend Market build_market(std::span<const RawShop> raw);

  std::vector<Shop> shops_;
  std::vector<RawShop> raw_;
  double scale_ = 1.0;
};

// Sorts by rent, normalizes by the smallest rent and validates the
// dominance-free ordering. Dominated shops are rejected, not pruned.
inline Market build_market(std::span<const RawShop> raw) {
  if (raw.empty()) throw Error(ErrorKind::kEmptyMarket, "market has no shops");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& s = raw[i];
    if (!(s.rent > 0.0) || !(s.buy > 0.0) || !std::isfinite(s.rent) ||
        !std::isfinite(s.buy)) {
      throw Error(ErrorKind::kNonPositivePrice,
                  "shop " + std::to_string(i + 1) +
                      " has a non-positive or non-finite price");
    }
  }
  std::vector<RawShop> sorted(raw.begin(), raw.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RawShop& a, const RawShop& b) { return a.rent < b.rent; });

  const double scale = sorted.front().rent;
  std::vector<Shop> shops;
  shops.reserve(sorted.size());
  for (const auto& s : sorted) shops.push_back({s.rent / scale, s.buy / scale});
  // Division by itself is exact, but pin it anyway.
  shops.front().rent = 1.0;

  for (std::size_t i = 1; i < shops.size(); ++i) {
    if (!(shops[i].rent > shops[i - 1].rent)) {
      throw Error(ErrorKind::kDominanceViolation,
                  "rents must be strictly increasing (shops " + std::to_string(i) +
                      " and " + std::to_string(i + 1) + " after sorting)");
    }
    if (!(shops[i].buy < shops[i - 1].buy)) {
      throw Error(ErrorKind::kDominanceViolation,
                  "buy prices must be strictly decreasing as rent increases (shops " +
                      std::to_string(i) + " and " + std::to_string(i + 1) +
                      " after sorting)");
    }
  }
  if (!(shops.back().buy > 1.0)) {
    throw Error(ErrorKind::kDegenerateBn,
                "normalized b_n must exceed 1 (got " + std::to_string(shops.back().buy) + ")");
  }
  return Market(std::move(shops), std::move(sorted), scale);
}

inline Market build_market(std::initializer_list<RawShop> raw) {
  return build_market(std::span<const RawShop>(raw.begin(), raw.size()));
}

enum class OfflineAction { kRentAtShop1, kBuyDay1AtShopN };

struct OfflineSolution {
  double cost = 0.0;
  OfflineAction action = OfflineAction::kRentAtShop1;
};

// min{x, b_n}; ties go to renting.
inline OfflineSolution offline_optimal(const Market& market, Day x) {
  require_day(x);
  const double rent_all = static_cast<double>(x) * market.rent(1);
  if (rent_all <= market.bn()) return {rent_all, OfflineAction::kRentAtShop1};
  return {market.bn(), OfflineAction::kBuyDay1AtShopN};
}

inline double opt_cost(const Market& market, Day x) {
  return offline_optimal(market, x).cost;
}

namespace markets {

// Six-shop synthetic market: buys 100..75, rents 1..1.25.
inline Market six_shop() {
  return build_market({{1.0, 100.0}, {1.05, 95.0}, {1.10, 90.0},
                       {1.15, 85.0}, {1.20, 80.0}, {1.25, 75.0}});
}

// Two shops (rent 1, buy 100) and (rent 1.25, buy 80).
inline Market two_shop() { return build_market({{1.0, 100.0}, {1.25, 80.0}}); }

// Season purchase vs. per-episode rental: Google Play and Amazon Prime Video.
inline Market google_amazon() {
  return build_market({{1.99, 29.99}, {2.99, 19.99}});
}

}  // namespace markets

}  // namespace mssr
