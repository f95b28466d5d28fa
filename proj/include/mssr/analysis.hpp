#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mssr/bounds.hpp"
#include "mssr/error.hpp"
#include "mssr/market.hpp"
#include "mssr/numeric.hpp"
#include "mssr/parallel.hpp"
#include "mssr/policies.hpp"

namespace mssr {

inline constexpr Day kOracleMaxDays = 100'000;

// Exhaustive minimum over every shop and every buy day in {1..x} or never.
inline double brute_force_opt(const Market& market, Day x) {
  require_day(x);
  if (x > kOracleMaxDays) {
    throw Error(ErrorKind::kOracleScaleExceeded,
                "brute-force oracle limited to x <= " + std::to_string(kOracleMaxDays));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= market.n(); ++i) {
    best = std::min(best, decision_cost(market, Decision{i, std::nullopt}, x));
    for (Day d = 1; d <= x; ++d) {
      best = std::min(best, decision_cost(market, Decision{i, d}, x));
    }
  }
  return best;
}

// Evaluates a plan's (expected) cost at many x in O(1) each via prefix sums;
// exact up to floating-point summation.
class PlanCostTable {
 public:
  PlanCostTable(const Market& market, Plan plan) : plan_(std::move(plan)) {
    rent_ = market.rent(plan_shop(plan_));
    buy_ = market.buy(plan_shop(plan_));
    if (const auto* p = std::get_if<RandomizedPolicy>(&plan_)) {
      const std::size_t k = p->mass.size();
      bought_.assign(k + 1, 0.0);
      tail_.assign(k + 1, 0.0);
      CompensatedSum bought;
      for (std::size_t i = 1; i <= k; ++i) {
        bought.add((buy_ + static_cast<double>(i - 1) * rent_) * p->mass[i - 1]);
        bought_[i] = bought.value();
      }
      CompensatedSum tail;
      for (std::size_t j = k; j-- > 0;) {
        tail.add(p->mass[j]);
        tail_[j] = tail.value();
      }
    }
  }

  double cost(Day x) const {
    if (const auto* d = std::get_if<Decision>(&plan_)) {
      if (!d->buy_day || x < *d->buy_day) return static_cast<double>(x) * rent_;
      return static_cast<double>(*d->buy_day - 1) * rent_ + buy_;
    }
    const auto k = static_cast<Day>(bought_.size() - 1);
    const auto j = static_cast<std::size_t>(std::min(x, k));
    return bought_[j] + static_cast<double>(x) * rent_ * tail_[j];
  }

  const Plan& plan() const noexcept { return plan_; }

 private:
  Plan plan_;
  double rent_ = 0.0;
  double buy_ = 0.0;
  std::vector<double> bought_;  // sum_{i<=j} (b + (i-1) r) p_i
  std::vector<double> tail_;    // sum_{i>j} p_i
};

// How prediction inputs are enumerated for each x.
struct NoPredictions {};
struct SingleRange {
  Day y_min = 1;
  Day y_max = 1000;
};
struct SingleExact {};
// Fixed families of m-element sets: all below b_n, all above, every split
// between one low and one high anchor, and sets built around x itself.
struct MultiFamily {
  long long m = 1;
};
using PredictionGrid = std::variant<NoPredictions, SingleRange, SingleExact, MultiFamily>;

inline std::string grid_label(const PredictionGrid& grid) {
  struct {
    std::string operator()(const NoPredictions&) const { return "none"; }
    std::string operator()(const SingleRange& g) const {
      return "y=" + std::to_string(g.y_min) + ".." + std::to_string(g.y_max);
    }
    std::string operator()(const SingleExact&) const { return "y=x"; }
    std::string operator()(const MultiFamily& g) const {
      return "family(m=" + std::to_string(g.m) + ")";
    }
  } visitor;
  return std::visit(visitor, grid);
}

inline std::vector<std::vector<double>> multi_prediction_family(const Market& market,
                                                                long long m, Day x) {
  const double bn = market.bn();
  const double xd = static_cast<double>(x);
  const std::vector<double> lows = {0.0, 1.0, std::floor(bn / 2.0), bn - 0.5};
  const std::vector<double> highs = {bn, bn + 0.5, 2.0 * bn, 1000.0};
  std::vector<std::vector<double>> sets;
  auto split = [&](double lo, double hi) {
    for (long long j = 0; j <= m; ++j) {
      std::vector<double> s(static_cast<std::size_t>(m), hi);
      std::fill_n(s.begin(), j, lo);
      sets.push_back(std::move(s));
    }
  };
  for (double lo : lows) {
    for (double hi : highs) split(lo, hi);
  }
  // Around x: exact sets, and exact predictions mixed with a far outlier.
  split(xd, xd);
  split(xd, xd + bn);
  split(std::max(0.0, xd - bn), xd);
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

struct Violation {
  Day x = 0;
  std::vector<double> predictions;
  double realized = 0.0;
  double bound = 0.0;
};

struct ComplianceReport {
  std::string algorithm;
  std::string market;
  double lambda = 0.0;
  long long m = 0;
  std::string grid;
  Day x_max = 0;
  Day y_max = 0;
  std::size_t cells = 0;
  double consistency_factor = 0.0;
  double robustness_factor = 0.0;
  double max_observed_ratio = 0.0;
  Day argmax_x = 0;
  // Smallest (bound - realized) over the grid. For the follow-the-prediction
  // algorithm the bound is on cost, OPT + zeta, and so is the margin.
  double max_bound_margin = std::numeric_limits<double>::infinity();
  std::size_t violation_count = 0;
  std::vector<Violation> violations;  // first kMaxListedViolations, by x

  bool passed() const noexcept { return violation_count == 0; }
};

inline constexpr double kMarginTolerance = 1e-9;
inline constexpr std::size_t kMaxListedViolations = 100;

struct WorstCaseOptions {
  Day x_min = 1;
  Day x_max = 1000;
  std::string market_id = "market";
  unsigned threads = 1;
  double tolerance = kMarginTolerance;
};

namespace detail {

struct PartialReport {
  std::size_t cells = 0;
  double max_ratio = 0.0;
  Day argmax_x = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::size_t violation_count = 0;
  std::vector<Violation> violations;
};

inline void merge_into(PartialReport& into, PartialReport&& part) {
  into.cells += part.cells;
  if (part.max_ratio > into.max_ratio) {
    into.max_ratio = part.max_ratio;
    into.argmax_x = part.argmax_x;
  }
  into.min_margin = std::min(into.min_margin, part.min_margin);
  into.violation_count += part.violation_count;
  for (auto& v : part.violations) {
    if (into.violations.size() >= kMaxListedViolations) break;
    into.violations.push_back(std::move(v));
  }
}

}  // namespace detail

// Realized ratio (exact expectation for randomized plans) against the
// algorithm's error-dependent bound at every (x, prediction) cell.
inline ComplianceReport worst_case_ratio(Algorithm algorithm, double lambda,
                                         const Market& market, const PredictionGrid& grid,
                                         const WorstCaseOptions& options = {}) {
  if (options.x_min < 1 || options.x_max < options.x_min) {
    throw Error(ErrorKind::kInvalidArgument, "x range must satisfy 1 <= x_min <= x_max");
  }
  const bool multi = std::holds_alternative<MultiFamily>(grid);
  if (multi != is_multi(algorithm)) {
    if (!(algorithm == Algorithm::kBdoa && std::holds_alternative<NoPredictions>(grid))) {
      throw Error(ErrorKind::kInvalidArgument,
                  "prediction grid does not match algorithm " +
                      std::string(to_string(algorithm)));
    }
  }
  if (uses_predictions(algorithm) && std::holds_alternative<NoPredictions>(grid)) {
    throw Error(ErrorKind::kInvalidArgument, "algorithm needs predictions");
  }
  if (const auto* r = std::get_if<SingleRange>(&grid); r && (r->y_min < 0 || r->y_max < r->y_min)) {
    throw Error(ErrorKind::kInvalidArgument, "y range must satisfy 0 <= y_min <= y_max");
  }
  const long long m = multi ? std::get<MultiFamily>(grid).m : 1;
  if (m < 1) throw Error(ErrorKind::kInvalidArgument, "m must be >= 1");

  const bool additive = algorithm == Algorithm::kSimple;
  std::optional<BoundReport> bound;
  if (!additive) bound = bound_for(algorithm, market, lambda, m);

  // Every plan here depends on the predictions only through z, so build one
  // cost table per z up front.
  std::vector<std::optional<PlanCostTable>> tables(static_cast<std::size_t>(m + 1));
  auto table_for = [&](const PredictionSet& set) -> const PlanCostTable& {
    if (!uses_predictions(algorithm)) return *tables[0];
    return *tables[count_above(set, market.bn())];
  };
  for (long long z = 0; z <= m; ++z) {
    if (!uses_predictions(algorithm) && z > 0) break;
    std::vector<double> values(static_cast<std::size_t>(m), 0.0);
    std::fill_n(values.begin(), z, market.bn() + 1.0);
    tables[static_cast<std::size_t>(z)].emplace(
        market, make_plan(algorithm, market, PredictionSet(values), lambda));
  }

  const auto x_count = static_cast<std::size_t>(options.x_max - options.x_min + 1);
  const unsigned threads = std::max(1u, options.threads);
  const std::size_t blocks = std::min<std::size_t>(x_count, std::size_t{threads} * 4);
  std::vector<detail::PartialReport> parts(blocks);

  auto check_cell = [&](detail::PartialReport& part, Day x, const PredictionSet* set) {
    const double opt = opt_cost(market, x);
    const PlanCostTable& table = set ? table_for(*set) : *tables[0];
    const double cost = table.cost(x);
    const double ratio = cost / opt;
    const double zeta = set ? set->error(x) : 0.0;
    double margin = 0.0;
    double limit = 0.0;
    if (additive) {
      limit = simple_bound(opt, zeta);
      margin = limit - cost;
    } else {
      limit = bound->error_bound(zeta, opt);
      margin = limit - ratio;
    }
    ++part.cells;
    if (ratio > part.max_ratio) {
      part.max_ratio = ratio;
      part.argmax_x = x;
    }
    part.min_margin = std::min(part.min_margin, margin);
    if (margin < -options.tolerance) {
      ++part.violation_count;
      if (part.violations.size() < kMaxListedViolations) {
        Violation v{x, {}, additive ? cost : ratio, limit};
        if (set) v.predictions.assign(set->values().begin(), set->values().end());
        part.violations.push_back(std::move(v));
      }
    }
  };

  parallel_blocks(blocks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t blk = begin; blk < end; ++blk) {
      auto& part = parts[blk];
      const std::size_t lo = blk * x_count / blocks;
      const std::size_t hi = (blk + 1) * x_count / blocks;
      for (std::size_t xi = lo; xi < hi; ++xi) {
        const Day x = options.x_min + static_cast<Day>(xi);
        std::visit(
            [&](const auto& g) {
              using G = std::decay_t<decltype(g)>;
              if constexpr (std::is_same_v<G, NoPredictions>) {
                check_cell(part, x, nullptr);
              } else if constexpr (std::is_same_v<G, SingleRange>) {
                for (Day y = g.y_min; y <= g.y_max; ++y) {
                  const PredictionSet set{static_cast<double>(y)};
                  check_cell(part, x, &set);
                }
              } else if constexpr (std::is_same_v<G, SingleExact>) {
                const PredictionSet set{static_cast<double>(x)};
                check_cell(part, x, &set);
              } else {
                for (auto& values : multi_prediction_family(market, g.m, x)) {
                  const PredictionSet set(std::move(values));
                  check_cell(part, x, &set);
                }
              }
            },
            grid);
      }
    }
  });

  detail::PartialReport total;
  for (auto& part : parts) detail::merge_into(total, std::move(part));

  ComplianceReport report;
  report.algorithm = std::string(to_string(algorithm));
  report.market = options.market_id;
  report.lambda = uses_lambda(algorithm) ? lambda : 0.0;
  report.m = uses_predictions(algorithm) ? m : 0;
  report.grid = grid_label(grid);
  report.x_max = options.x_max;
  if (const auto* r = std::get_if<SingleRange>(&grid)) report.y_max = r->y_max;
  report.cells = total.cells;
  if (bound) {
    report.consistency_factor = bound->consistency_factor;
    report.robustness_factor = bound->robustness_factor;
  }
  report.max_observed_ratio = total.max_ratio;
  report.argmax_x = total.argmax_x;
  report.max_bound_margin = total.min_margin;
  report.violation_count = total.violation_count;
  report.violations = std::move(total.violations);
  return report;
}

struct LambdaChoice {
  double lambda = 0.0;
  double bound = 0.0;
};

// Grid λ minimizing the error-dependent bound at an assumed zeta/OPT (may be
// +inf). Grid points outside the algorithm's valid range are skipped; ties go
// to the smallest λ.
inline LambdaChoice grid_search_lambda(Algorithm algorithm, const Market& market,
                                       double zeta_over_opt, std::span<const double> grid,
                                       long long m = 1) {
  if (!(zeta_over_opt >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "assumed zeta/OPT must be >= 0");
  }
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::optional<LambdaChoice> best;
  for (double lambda : sorted) {
    if (!lambda_valid(algorithm, market, lambda)) continue;
    if (algorithm == Algorithm::kRandMulti && !rand_multi_feasible(market, lambda, m)) continue;
    const double value = bound_for(algorithm, market, lambda, m).error_bound(zeta_over_opt, 1.0);
    if (!best || value < best->bound) best = LambdaChoice{lambda, value};
  }
  if (!best) {
    throw Error(ErrorKind::kInvalidArgument, "no grid lambda inside the valid range");
  }
  return *best;
}

inline std::vector<double> lambda_grid(double start, double stop, double step) {
  std::vector<double> grid;
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long long i = 0; i < count; ++i) {
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return grid;
}

}  // namespace mssr
