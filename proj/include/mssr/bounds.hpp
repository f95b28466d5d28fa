#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "mssr/error.hpp"
#include "mssr/market.hpp"
#include "mssr/policies.hpp"

namespace mssr {

// Competitive-ratio guarantees of one algorithm at one lambda (and m).
//
// error_bound(zeta, opt) is the error-dependent ratio bound. consistency_factor
// equals error_bound(0, .) and robustness_factor is its supremum over zeta, so
// both are valid guarantees. nominal_robustness is the simplified closed form
// usually quoted for the algorithm; for the deterministic single-prediction
// algorithm it is smaller than the supremum whenever b_1 > b_n and is not a
// guarantee on its own.
struct BoundReport {
  double consistency_factor = 0.0;
  double robustness_factor = 0.0;
  double nominal_robustness = 0.0;
  std::function<double(double zeta, double opt)> error_bound;
};

namespace detail {

// 1 - e^{-t} without cancellation for small t.
inline double one_minus_exp_neg(double t) { return -std::expm1(-t); }

inline double error_ratio(double zeta, double opt) {
  if (!(opt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "OPT must be > 0");
  if (!(zeta >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "zeta must be >= 0");
  return zeta / opt;
}

}  // namespace detail

inline double bdoa_cr(const Market& market) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= market.n(); ++i) {
    best = std::min(best, market.rent(i) + (market.buy(i) - market.rent(i)) / market.bn());
  }
  return best;
}

// Additive cost bound for the follow-the-prediction algorithm.
inline double simple_bound(double opt, double zeta) { return opt + zeta; }

inline BoundReport det_single_bound(const Market& market, double lambda) {
  require_lambda_open(lambda, 0.0, 1.0);
  const double rn = market.rn();
  const double ratio = market.b1() / market.bn();
  const double consistency = (lambda + 1.0) * rn + ratio;
  const double slope = std::max(lambda * rn + 1.0, ratio / (1.0 - lambda));
  const double cap = std::max(rn + 1.0 / lambda, ratio * (1.0 + 1.0 / lambda));
  BoundReport report;
  report.consistency_factor = consistency;
  report.robustness_factor = cap;
  report.nominal_robustness = std::max(rn, ratio) + 1.0 / lambda;
  report.error_bound = [=](double zeta, double opt) {
    return std::min(consistency + slope * detail::error_ratio(zeta, opt), cap);
  };
  return report;
}

inline BoundReport rand_single_bound(const Market& market, double lambda) {
  require_lambda_open(lambda, 1.0 / market.bn(), 1.0);
  const double rn = market.rn();
  const double bn = market.bn();
  const double b1 = market.b1();
  const double consistency = rn * lambda / detail::one_minus_exp_neg(rn * lambda);
  const double robust =
      (b1 / bn) * std::max(rn / detail::one_minus_exp_neg(rn * (lambda - 1.0 / bn)),
                           (1.0 / lambda + 1.0 / b1) / detail::one_minus_exp_neg(1.0 / lambda));
  BoundReport report;
  report.consistency_factor = consistency;
  report.robustness_factor = robust;
  report.nominal_robustness = robust;
  report.error_bound = [=](double zeta, double opt) {
    return std::min(consistency * (1.0 + detail::error_ratio(zeta, opt)), robust);
  };
  return report;
}

inline void require_prediction_count(long long m) {
  if (m < 1) throw Error(ErrorKind::kInvalidArgument, "m must be >= 1");
}

inline BoundReport det_multi_bound(const Market& market, double lambda, long long m) {
  require_lambda_open(lambda, 0.0, 1.0);
  require_prediction_count(m);
  const double rn = market.rn();
  const double ratio = market.b1() / market.bn();
  const double consistency = (lambda + 1.0) * rn + ratio;
  const double slope = std::max(lambda * rn + 1.0, 1.0 / (1.0 - lambda));
  const double robust = std::max(rn, ratio) + static_cast<double>(m + 1) / lambda;
  BoundReport report;
  report.consistency_factor = consistency;
  report.robustness_factor = robust;
  report.nominal_robustness = robust;
  report.error_bound = [=](double zeta, double opt) {
    return std::min(consistency + slope * detail::error_ratio(zeta, opt), robust);
  };
  return report;
}

// Needs lambda / (m + 1) > 1 / b_n; otherwise the robustness term has a
// non-positive exponent and no finite guarantee exists.
inline bool rand_multi_feasible(const Market& market, double lambda, long long m) {
  return lambda / static_cast<double>(m + 1) > 1.0 / market.bn();
}

inline BoundReport rand_multi_bound(const Market& market, double lambda, long long m) {
  require_lambda_open(lambda, 0.0, 1.0);
  require_prediction_count(m);
  if (!rand_multi_feasible(market, lambda, m)) {
    throw Error(ErrorKind::kInfeasibleBound,
                "lambda/(m+1) must exceed 1/b_n for a finite robustness bound");
  }
  const double rn = market.rn();
  const double bn = market.bn();
  const double b1 = market.b1();
  const double mp1 = static_cast<double>(m + 1);
  const double consistency = rn * lambda / detail::one_minus_exp_neg(rn * lambda / mp1);
  const double robust =
      (b1 / bn) * std::max(rn / detail::one_minus_exp_neg(rn * (lambda / mp1 - 1.0 / bn)),
                           (mp1 / lambda + 1.0 / b1) / detail::one_minus_exp_neg(1.0 / lambda));
  BoundReport report;
  report.consistency_factor = consistency;
  report.robustness_factor = robust;
  report.nominal_robustness = robust;
  report.error_bound = [=](double zeta, double opt) {
    return std::min(robust, consistency * (1.0 + detail::error_ratio(zeta, opt)));
  };
  return report;
}

// Ratio bound for any algorithm that has one. Throws for the follow-the-
// prediction and no-plus-one variants, whose guarantees are not ratios.
inline BoundReport bound_for(Algorithm a, const Market& market, double lambda, long long m) {
  switch (a) {
    case Algorithm::kBdoa: {
      const double cr = bdoa_cr(market);
      BoundReport report{cr, cr, cr, [cr](double, double) { return cr; }};
      return report;
    }
    case Algorithm::kDet: return det_single_bound(market, lambda);
    case Algorithm::kRand: return rand_single_bound(market, lambda);
    case Algorithm::kDetMulti: return det_multi_bound(market, lambda, m);
    case Algorithm::kRandMulti: return rand_multi_bound(market, lambda, m);
    default:
      throw Error(ErrorKind::kInvalidArgument,
                  "no competitive-ratio bound for " + std::string(to_string(a)));
  }
}

}  // namespace mssr
