#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mssr/bounds.hpp"

using namespace mssr;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(BdoaCr, Examples) {
  EXPECT_NEAR(bdoa_cr(markets::six_shop()), 1.25 + 73.75 / 75, 1e-12);
  EXPECT_NEAR(bdoa_cr(markets::six_shop()), 2.2333333333, 1e-9);
  EXPECT_NEAR(bdoa_cr(build_market({{1.0, 10.0}})), 1.9, 1e-12);
  EXPECT_NEAR(bdoa_cr(markets::two_shop()), 2.234375, 1e-12);
}

TEST(SimpleBound, Examples) {
  EXPECT_DOUBLE_EQ(simple_bound(75, 0), 75);
  EXPECT_DOUBLE_EQ(simple_bound(75, 10), 85);
}

TEST(DetSingleBound, Examples) {
  const auto b = det_single_bound(markets::two_shop(), 0.5);
  EXPECT_NEAR(b.consistency_factor, 3.125, 1e-12);
  EXPECT_NEAR(b.nominal_robustness, 3.25, 1e-12);
  // The cap of the error-dependent bound, which is what the realized ratio
  // can actually reach (3.7375 at x = 79, y large).
  EXPECT_NEAR(b.robustness_factor, 3.75, 1e-12);
  EXPECT_NEAR(b.error_bound(0, 80), 3.125, 1e-12);
  EXPECT_NEAR(b.error_bound(1e12, 80), 3.75, 1e-12);
  EXPECT_NEAR(b.error_bound(kInf, 1), 3.75, 1e-12);
  EXPECT_THROW(det_single_bound(markets::two_shop(), 1.0), Error);
}

TEST(RandSingleBound, Examples) {
  const Market m = markets::two_shop();
  const auto b = rand_single_bound(m, 0.5);
  // 0.625 / (1 - e^{-0.625})
  EXPECT_NEAR(b.consistency_factor, 0.625 / (1 - std::exp(-0.625)), 1e-12);
  EXPECT_NEAR(b.consistency_factor, 1.3448421, 1e-7);
  EXPECT_LT(b.consistency_factor, det_single_bound(m, 0.5).consistency_factor);
  EXPECT_GT(rand_single_bound(m, 1.0 / 80 + 1e-9).robustness_factor, 1e6);
  EXPECT_THROW(rand_single_bound(m, 1.0 / 80), Error);
}

TEST(DetMultiBound, Examples) {
  const Market m = markets::two_shop();
  EXPECT_NEAR(det_multi_bound(m, 0.5, 5).robustness_factor, 13.25, 1e-12);
  EXPECT_NEAR(det_multi_bound(m, 0.5, 1).robustness_factor, 1.25 + 4, 1e-12);
  EXPECT_GT(det_multi_bound(m, 0.5, 1).robustness_factor, det_single_bound(m, 0.5).nominal_robustness);
  for (long long k : {1, 2, 5, 8}) {
    EXPECT_DOUBLE_EQ(det_multi_bound(m, 0.3, k).consistency_factor,
                     det_single_bound(m, 0.3).consistency_factor);
  }
}

TEST(RandMultiBound, Examples) {
  const Market m = markets::two_shop();
  const auto b = rand_multi_bound(m, 0.5, 5);
  EXPECT_NEAR(b.consistency_factor, 0.625 / (1 - std::exp(-1.25 / 12)), 1e-12);
  EXPECT_NEAR(b.consistency_factor, 6.3179244, 1e-6);
  EXPECT_TRUE(rand_multi_feasible(m, 0.5, 5));
  double prev = 0;
  for (long long k = 1; k <= 8; ++k) {
    const double c = rand_multi_bound(m, 0.5, k).consistency_factor;
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_FALSE(rand_multi_feasible(m, 0.1, 8));
  try {
    rand_multi_bound(m, 0.1, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleBound);
  }
}

TEST(Bounds, Invariants) {
  for (const Market& m : {markets::six_shop(), markets::two_shop(), markets::google_amazon()}) {
    for (int i = 1; i <= 19; ++i) {
      const double lambda = 0.05 * i;
      std::vector<BoundReport> reports = {det_single_bound(m, lambda)};
      if (lambda > 1.0 / m.bn()) reports.push_back(rand_single_bound(m, lambda));
      for (long long k : {1, 3, 5, 8}) {
        reports.push_back(det_multi_bound(m, lambda, k));
        if (rand_multi_feasible(m, lambda, k)) reports.push_back(rand_multi_bound(m, lambda, k));
      }
      for (const auto& r : reports) {
        for (double opt : {1.0, 10.0, 75.0}) {
          EXPECT_LE(r.error_bound(0, opt), r.consistency_factor + 1e-9);
          double prev = 0;
          for (double zeta : {0.0, 0.5, 1.0, 5.0, 50.0, 500.0, 1e9, kInf}) {
            const double v = r.error_bound(zeta, opt);
            EXPECT_GE(v, prev - 1e-12);
            EXPECT_LE(v, r.robustness_factor + 1e-9);
            prev = v;
          }
        }
      }
    }
  }
}

TEST(Bounds, Tradeoff) {
  const Market m = markets::six_shop();
  for (int i = 2; i <= 19; ++i) {
    const double lo = 0.05 * (i - 1);
    const double hi = 0.05 * i;
    EXPECT_LT(det_single_bound(m, lo).consistency_factor, det_single_bound(m, hi).consistency_factor);
    EXPECT_GT(det_single_bound(m, lo).robustness_factor, det_single_bound(m, hi).robustness_factor);
    if (lo > 1.0 / m.bn()) {
      EXPECT_LT(rand_single_bound(m, lo).consistency_factor, rand_single_bound(m, hi).consistency_factor);
      EXPECT_GT(rand_single_bound(m, lo).robustness_factor, rand_single_bound(m, hi).robustness_factor);
    }
  }
}

TEST(Bounds, RandomizedConsistencyTighter) {
  for (const Market& m : {markets::six_shop(), markets::two_shop(), markets::google_amazon()}) {
    for (int i = 1; i < 100; ++i) {
      const double lambda = 0.01 * i;
      if (lambda <= 1.0 / m.bn() || m.rn() * lambda > 2) continue;
      EXPECT_LE(rand_single_bound(m, lambda).consistency_factor,
                det_single_bound(m, lambda).consistency_factor);
    }
  }
}

TEST(Bounds, BoundForDispatch) {
  const Market m = markets::two_shop();
  EXPECT_NEAR(bound_for(Algorithm::kBdoa, m, 0, 1).consistency_factor, 2.234375, 1e-12);
  EXPECT_THROW(bound_for(Algorithm::kSimple, m, 0.5, 1), Error);
  EXPECT_THROW(bound_for(Algorithm::kDetMultiNoPlus, m, 0.5, 2), Error);
}
