#include <gtest/gtest.h>

#include "mssr/analysis.hpp"
#include "mssr/market.hpp"

using namespace mssr;

TEST(Market, SixShopNormalizesToItself) {
  const Market m = markets::six_shop();
  EXPECT_EQ(m.n(), 6u);
  EXPECT_DOUBLE_EQ(m.rent(1), 1.0);
  EXPECT_DOUBLE_EQ(m.bn(), 75.0);
  EXPECT_DOUBLE_EQ(m.scale(), 1.0);
}

TEST(Market, GoogleAmazonDividesByCheapestRent) {
  const Market m = markets::google_amazon();
  EXPECT_EQ(m.n(), 2u);
  EXPECT_DOUBLE_EQ(m.scale(), 1.99);
  EXPECT_DOUBLE_EQ(m.rent(1), 1.0);
  EXPECT_NEAR(m.rent(2), 1.50251, 1e-5);
  EXPECT_NEAR(m.b1(), 15.0704, 1e-4);
  EXPECT_NEAR(m.bn(), 10.0452, 1e-4);
}

TEST(Market, SortsByRent) {
  const Market m = build_market({{2.0, 50.0}, {1.0, 100.0}});
  EXPECT_DOUBLE_EQ(m.rent(1), 1.0);
  EXPECT_DOUBLE_EQ(m.buy(1), 100.0);
  EXPECT_DOUBLE_EQ(m.rent(2), 2.0);
  EXPECT_DOUBLE_EQ(m.buy(2), 50.0);
}

TEST(Market, RejectsBadInput) {
  auto kind_of = [](std::initializer_list<RawShop> shops) {
    try {
      build_market(shops);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInvalidArgument;
  };
  EXPECT_THROW(build_market(std::span<const RawShop>{}), Error);
  EXPECT_EQ(kind_of({{1.0, 0.0}}), ErrorKind::kNonPositivePrice);
  EXPECT_EQ(kind_of({{-1.0, 10.0}}), ErrorKind::kNonPositivePrice);
  EXPECT_EQ(kind_of({{1.0, 50.0}, {2.0, 60.0}}), ErrorKind::kDominanceViolation);
  EXPECT_EQ(kind_of({{1.0, 50.0}, {1.0, 40.0}}), ErrorKind::kDominanceViolation);
  EXPECT_EQ(kind_of({{1.0, 1.0}}), ErrorKind::kDegenerateBn);
}

TEST(Market, Idempotent) {
  const Market m = markets::two_shop();
  std::vector<RawShop> again;
  for (const auto& s : m.shops()) again.push_back({s.rent, s.buy});
  const Market n = build_market(again);
  EXPECT_DOUBLE_EQ(n.scale(), 1.0);
  for (std::size_t i = 1; i <= m.n(); ++i) {
    EXPECT_DOUBLE_EQ(n.rent(i), m.rent(i));
    EXPECT_DOUBLE_EQ(n.buy(i), m.buy(i));
  }
}

TEST(Market, DenormalizedCostInvariantUnderPrescale) {
  const Market a = markets::google_amazon();
  const Market b = build_market({{1.99 * 7, 29.99 * 7}, {2.99 * 7, 19.99 * 7}});
  for (Day x : {1, 5, 10, 11, 50}) {
    EXPECT_NEAR(a.denormalize(opt_cost(a, x)) * 7, b.denormalize(opt_cost(b, x)), 1e-9);
  }
}

TEST(Offline, Examples) {
  const Market m = markets::six_shop();
  const auto low = offline_optimal(m, 50);
  EXPECT_DOUBLE_EQ(low.cost, 50.0);
  EXPECT_EQ(low.action, OfflineAction::kRentAtShop1);
  const auto high = offline_optimal(m, 200);
  EXPECT_DOUBLE_EQ(high.cost, 75.0);
  EXPECT_EQ(high.action, OfflineAction::kBuyDay1AtShopN);
  EXPECT_EQ(offline_optimal(m, 75).action, OfflineAction::kRentAtShop1);
}

TEST(Offline, MonotoneAndFlatPastBreakEven) {
  for (const Market& m : {markets::six_shop(), markets::two_shop(), markets::google_amazon()}) {
    double prev = 0.0;
    const auto flat = static_cast<Day>(std::ceil(m.bn()));
    for (Day x = 1; x <= 1000; ++x) {
      const double c = opt_cost(m, x);
      EXPECT_GE(c, prev);
      if (x >= flat) {
        EXPECT_DOUBLE_EQ(c, opt_cost(m, flat));
      }
      prev = c;
    }
  }
}

TEST(Offline, MatchesBruteForce) {
  for (const Market& m : {markets::six_shop(), markets::two_shop(), markets::google_amazon()}) {
    for (Day x = 1; x <= 300; ++x) EXPECT_EQ(opt_cost(m, x), brute_force_opt(m, x)) << x;
  }
}

TEST(Offline, BruteForceGuard) {
  EXPECT_THROW(brute_force_opt(markets::two_shop(), 100'001), Error);
  EXPECT_DOUBLE_EQ(brute_force_opt(markets::two_shop(), 1), 1.0);
}
