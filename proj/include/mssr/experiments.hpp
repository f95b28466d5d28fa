#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "mssr/analysis.hpp"
#include "mssr/distribution.hpp"
#include "mssr/error.hpp"
#include "mssr/market.hpp"
#include "mssr/numeric.hpp"
#include "mssr/parallel.hpp"
#include "mssr/policies.hpp"

namespace mssr {

// ---------------------------------------------------------------------------
// Prediction error models. Each produces one prediction for a realized x.

// y = max(x + eps, 0), eps ~ N(delta, sigma^2). sigma = 0 gives y = x + delta.
struct GaussianError {
  double delta = 0.0;
  double sigma = 0.0;
};
// y = total - x.
struct ReverseError {
  double total = 0.0;
};
// y = low if x >= threshold, else high.
struct FlipError {
  double threshold = 0.0;
  double low = 0.0;
  double high = 0.0;
};
// y drawn independently of x from a fixed distribution.
struct EmpiricalError {
  std::shared_ptr<const EmpiricalDistribution> distribution;
  std::string id = "empirical";
};

using ErrorModel = std::variant<GaussianError, ReverseError, FlipError, EmpiricalError>;

inline ErrorModel perfect_prediction() { return GaussianError{0.0, 0.0}; }

inline void validate(const ErrorModel& model) {
  struct {
    void operator()(const GaussianError& g) const {
      if (!(g.sigma >= 0.0) || !std::isfinite(g.sigma) || !std::isfinite(g.delta)) {
        throw Error(ErrorKind::kConfigInvalid, "gaussian error needs finite delta and sigma >= 0");
      }
    }
    void operator()(const ReverseError& r) const {
      if (!(r.total > 0.0)) throw Error(ErrorKind::kConfigInvalid, "reverse total must be > 0");
    }
    void operator()(const FlipError& f) const {
      if (!(f.threshold > 0.0) || !(f.low > 0.0) || !(f.high > 0.0)) {
        throw Error(ErrorKind::kConfigInvalid, "flip parameters must be > 0");
      }
    }
    void operator()(const EmpiricalError& e) const {
      if (!e.distribution) throw Error(ErrorKind::kConfigInvalid, "empirical model has no distribution");
    }
  } visitor;
  std::visit(visitor, model);
}

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace detail

// Empty for Gaussian models, which are keyed by their delta/sigma columns.
inline std::string model_label(const ErrorModel& model) {
  struct {
    std::string operator()(const GaussianError&) const { return ""; }
    std::string operator()(const ReverseError& r) const {
      return "reverse(" + detail::format_number(r.total) + ")";
    }
    std::string operator()(const FlipError& f) const {
      return "flip(" + detail::format_number(f.threshold) + "," + detail::format_number(f.low) +
             "," + detail::format_number(f.high) + ")";
    }
    std::string operator()(const EmpiricalError& e) const { return "empirical(" + e.id + ")"; }
  } visitor;
  return std::visit(visitor, model);
}

// ---------------------------------------------------------------------------
// Seeding: every trial owns independent streams derived from
// (master_seed, cell, trial), so results do not depend on scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return splitmix64(seed ^ splitmix64(value));
}

inline std::uint64_t hash_double(std::uint64_t seed, double v) noexcept {
  return hash_combine(seed, std::bit_cast<std::uint64_t>(v));
}

inline std::uint64_t hash_string(std::uint64_t seed, const std::string& s) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : s) h = hash_combine(h, c);
  return hash_combine(h, s.size());
}

// Identity of an (error model, m) cell. Excludes algorithm and lambda so all
// of them see the same draws for a given trial index.
inline std::uint64_t cell_id(const ErrorModel& model, long long m) {
  std::uint64_t h = hash_combine(0x6d737372ULL, model.index());
  struct {
    std::uint64_t& h;
    void operator()(const GaussianError& g) const { h = hash_double(hash_double(h, g.delta), g.sigma); }
    void operator()(const ReverseError& r) const { h = hash_double(h, r.total); }
    void operator()(const FlipError& f) const {
      h = hash_double(hash_double(hash_double(h, f.threshold), f.low), f.high);
    }
    void operator()(const EmpiricalError& e) const {
      h = hash_string(h, e.id);
      for (double p : e.distribution->mass()) h = hash_double(h, p);
    }
  } visitor{h};
  std::visit(visitor, model);
  return hash_combine(h, static_cast<std::uint64_t>(m));
}

// Stream for the realized x, shared by every cell: all error models and
// prediction counts see the same x for a given trial index.
inline constexpr std::uint64_t kDayStream = 0x78646179ULL;

inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t cell,
                                std::uint64_t trial) noexcept {
  return hash_combine(hash_combine(splitmix64(master_seed), cell), trial);
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double draw_prediction(const ErrorModel& model, Day x, std::mt19937_64& rng) {
  const double xd = static_cast<double>(x);
  struct {
    double xd;
    std::mt19937_64& rng;
    double operator()(const GaussianError& g) const {
      double eps = g.delta;
      if (g.sigma > 0.0) eps = std::normal_distribution<double>(g.delta, g.sigma)(rng);
      return std::max(xd + eps, 0.0);
    }
    double operator()(const ReverseError& r) const { return std::max(r.total - xd, 0.0); }
    double operator()(const FlipError& f) const { return xd >= f.threshold ? f.low : f.high; }
    double operator()(const EmpiricalError& e) const {
      return static_cast<double>(e.distribution->sample(uniform01(rng)));
    }
  } visitor{xd, rng};
  return std::visit(visitor, model);
}

// ---------------------------------------------------------------------------

// x uniform on the integers {1..floor(gamma)}.
struct UniformDays {
  double gamma = 1.0;
};
struct EmpiricalDays {
  std::shared_ptr<const EmpiricalDistribution> distribution;
};
using DayDistribution = std::variant<UniformDays, EmpiricalDays>;

inline Day draw_day(const DayDistribution& days, std::mt19937_64& rng) {
  if (const auto* u = std::get_if<UniformDays>(&days)) {
    return std::uniform_int_distribution<Day>(1, static_cast<Day>(std::floor(u->gamma)))(rng);
  }
  return std::get<EmpiricalDays>(days).distribution->sample(uniform01(rng));
}

inline double gamma_of(const DayDistribution& days) {
  if (const auto* u = std::get_if<UniformDays>(&days)) return u->gamma;
  return static_cast<double>(std::get<EmpiricalDays>(days).distribution->support_end());
}

enum class RandomizedEval { kExact, kSampled };

struct ExperimentConfig {
  std::string market_id = "market";
  Market market = markets::six_shop();
  std::vector<Algorithm> algorithms;
  std::vector<double> lambdas;
  DayDistribution days = UniformDays{300.0};
  std::vector<ErrorModel> error_models;
  std::vector<long long> ms = {1};
  long long trials = 10'000;
  std::uint64_t master_seed = 0;
  RandomizedEval randomized_eval = RandomizedEval::kExact;
  unsigned threads = 1;
};

struct ResultRow {
  std::string algorithm;
  double lambda = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  long long m = 1;
  double gamma = 0.0;
  double mean_cr = 0.0;
  double stderr_cr = 0.0;
  long long trials = 0;

  auto key() const { return std::tie(algorithm, lambda, delta, sigma, m, gamma); }
  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline void validate(const ExperimentConfig& config) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfigInvalid, msg); };
  if (config.trials < 1) fail("trials must be >= 1");
  if (config.algorithms.empty()) fail("no algorithms");
  if (config.error_models.empty()) fail("no error models");
  if (config.ms.empty()) fail("no prediction counts");
  for (long long m : config.ms) {
    if (m < 1) fail("m must be >= 1");
  }
  if (const auto* u = std::get_if<UniformDays>(&config.days)) {
    if (!(u->gamma >= 1.0) || !std::isfinite(u->gamma)) fail("gamma must be >= 1");
  } else if (!std::get<EmpiricalDays>(config.days).distribution) {
    fail("empirical day distribution missing");
  }
  const bool any_lambda = std::any_of(config.algorithms.begin(), config.algorithms.end(), uses_lambda);
  if (any_lambda && config.lambdas.empty()) fail("no lambda values");
  for (Algorithm a : config.algorithms) {
    if (!uses_lambda(a)) continue;
    for (double lambda : config.lambdas) {
      if (!lambda_valid(a, config.market, lambda)) {
        const auto [lo, hi] = lambda_range(a, config.market);
        fail("lambda " + detail::format_number(lambda) + " outside (" + detail::format_number(lo) +
             "," + detail::format_number(hi) + ") for " + std::string(to_string(a)));
      }
    }
  }
  for (const auto& model : config.error_models) validate(model);
}

namespace detail {

struct Series {
  Algorithm algorithm;
  double lambda;
  std::vector<std::optional<PlanCostTable>> tables;  // by z; empty if undefined
  std::vector<double> ratios;         // indexed by trial
};

inline std::pair<double, double> mean_and_stderr(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  const double mean = compensated_sum(values) / n;
  if (values.size() < 2) return {mean, 0.0};
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double variance = sq.value() / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

}  // namespace detail

// Monte Carlo average competitive ratio for every (algorithm, lambda, error
// model, m) cell. Single-prediction algorithms run only at m = 1.
inline std::vector<ResultRow> run_cells(const ExperimentConfig& config) {
  validate(config);
  const Market& market = config.market;
  const double gamma = gamma_of(config.days);
  std::vector<ResultRow> rows;

  std::vector<long long> ms = config.ms;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  const bool has_single = std::any_of(config.algorithms.begin(), config.algorithms.end(),
                                      [](Algorithm a) { return !is_multi(a); });
  if (has_single && std::find(ms.begin(), ms.end(), 1) == ms.end()) ms.insert(ms.begin(), 1);

  const auto trials = static_cast<std::size_t>(config.trials);

  for (const auto& model : config.error_models) {
    for (long long m : ms) {
      std::vector<detail::Series> series;
      for (Algorithm a : config.algorithms) {
        if (is_multi(a) == false && m != 1) continue;
        if (is_multi(a) && std::find(config.ms.begin(), config.ms.end(), m) == config.ms.end()) {
          continue;
        }
        const std::vector<double> lambdas =
            uses_lambda(a) ? config.lambdas : std::vector<double>{0.0};
        for (double lambda : lambdas) {
          detail::Series s{a, lambda, {}, std::vector<double>(trials, 0.0)};
          const long long zmax = uses_predictions(a) ? m : 0;
          for (long long z = 0; z <= zmax; ++z) {
            std::vector<double> values(static_cast<std::size_t>(m), 0.0);
            std::fill_n(values.begin(), z, market.bn() + 1.0);
            try {
              s.tables.emplace_back(
                  PlanCostTable(market, make_plan(a, market, PredictionSet(values), lambda)));
            } catch (const Error& e) {
              if (e.kind() != ErrorKind::kZeroDenominator) throw;
              s.tables.emplace_back(std::nullopt);
            }
          }
          series.push_back(std::move(s));
        }
      }
      if (series.empty()) continue;

      const std::uint64_t cell = cell_id(model, m);
      parallel_blocks(trials, config.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> values(static_cast<std::size_t>(m));
        for (std::size_t t = begin; t < end; ++t) {
          std::mt19937_64 day_rng(trial_seed(config.master_seed, kDayStream, t));
          std::mt19937_64 rng(trial_seed(config.master_seed, cell, t));
          const Day x = draw_day(config.days, day_rng);
          for (auto& v : values) v = draw_prediction(model, x, rng);
          const double u = uniform01(rng);
          const PredictionSet set(values);
          const std::size_t z = count_above(set, market.bn());
          const double opt = opt_cost(market, x);
          for (auto& s : series) {
            const bool single = !is_multi(s.algorithm);
            const std::size_t zi = !uses_predictions(s.algorithm) ? 0
                                   : single                       ? (set.front() >= market.bn() ? 1 : 0)
                                                                  : z;
            if (!s.tables[zi]) {
              throw Error(ErrorKind::kConfigInvalid,
                          std::string(to_string(s.algorithm)) +
                              ": zero break-even denominator (2z - m = 0) at m=" +
                              std::to_string(m));
            }
            const PlanCostTable& table = *s.tables[zi];
            double cost = 0.0;
            if (config.randomized_eval == RandomizedEval::kSampled &&
                std::holds_alternative<RandomizedPolicy>(table.plan())) {
              const auto& policy = std::get<RandomizedPolicy>(table.plan());
              cost = decision_cost(market, Decision{policy.shop, sample_buy_day(policy, u)}, x);
            } else {
              cost = table.cost(x);
            }
            s.ratios[t] = cost / opt;
          }
        }
      });

      const std::string label = model_label(model);
      double delta = 0.0;
      double sigma = 0.0;
      if (const auto* g = std::get_if<GaussianError>(&model)) {
        delta = g->delta;
        sigma = g->sigma;
      }
      for (const auto& s : series) {
        const auto [mean, se] = detail::mean_and_stderr(s.ratios);
        ResultRow row;
        row.algorithm = std::string(to_string(s.algorithm));
        if (!label.empty() && uses_predictions(s.algorithm)) row.algorithm += ":" + label;
        row.lambda = s.lambda;
        row.delta = uses_predictions(s.algorithm) ? delta : 0.0;
        row.sigma = uses_predictions(s.algorithm) ? sigma : 0.0;
        row.m = uses_predictions(s.algorithm) ? m : 0;
        row.gamma = gamma;
        row.mean_cr = mean;
        row.stderr_cr = se;
        row.trials = config.trials;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// Rows sorted by their key columns. Prediction-free algorithms produce the
// same row under every error model (x draws are shared); keep one.
inline std::vector<ResultRow> finalize_rows(std::vector<ResultRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.key() < b.key(); });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const ResultRow& a, const ResultRow& b) { return a.key() == b.key(); }),
             rows.end());
  return rows;
}

inline std::vector<ResultRow> run_synthetic(const ExperimentConfig& config) {
  if (!std::holds_alternative<UniformDays>(config.days)) {
    throw Error(ErrorKind::kConfigInvalid, "synthetic runs draw x uniformly on {1..gamma}");
  }
  return finalize_rows(run_cells(config));
}

// Fixed Gamma = b_1 setting with m i.i.d. predictions per trial.
inline std::vector<ResultRow> multi_prediction_sweep(const ExperimentConfig& config) {
  const auto* u = std::get_if<UniformDays>(&config.days);
  if (!u || std::abs(u->gamma - config.market.b1()) > 1e-9 * config.market.b1()) {
    throw Error(ErrorKind::kConfigInvalid, "multi-prediction sweep uses gamma = b_1");
  }
  if (std::none_of(config.algorithms.begin(), config.algorithms.end(), is_multi)) {
    throw Error(ErrorKind::kConfigInvalid, "multi-prediction sweep needs a multi-prediction algorithm");
  }
  return finalize_rows(run_cells(config));
}

// Prediction models for the viewership study, E = support size of the
// viewing distribution.
enum class RealModel { kPerfect, kPrediction1, kPrediction2, kPrediction3 };

inline std::string_view to_string(RealModel model) {
  switch (model) {
    case RealModel::kPerfect: return "perfect";
    case RealModel::kPrediction1: return "prediction1";
    case RealModel::kPrediction2: return "prediction2";
    case RealModel::kPrediction3: return "prediction3";
  }
  return "?";
}

inline RealModel parse_real_model(std::string_view name) {
  for (RealModel m : {RealModel::kPerfect, RealModel::kPrediction1, RealModel::kPrediction2,
                      RealModel::kPrediction3}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kConfigInvalid, "unknown prediction model '" + std::string(name) + "'");
}

// Builds the error model: perfect y = x; prediction1 draws from a second
// distribution; prediction2 y = E - x; prediction3 y = 1 if x >= b_n else E.
inline ErrorModel real_error_model(RealModel model, const Market& market, Day episodes,
                                   std::shared_ptr<const EmpiricalDistribution> second) {
  const auto e = static_cast<double>(episodes);
  switch (model) {
    case RealModel::kPerfect: return perfect_prediction();
    case RealModel::kPrediction1:
      if (!second) {
        throw Error(ErrorKind::kEmptyDistribution, "prediction1 needs a second distribution");
      }
      return EmpiricalError{std::move(second), "prediction1"};
    case RealModel::kPrediction2: return ReverseError{e};
    case RealModel::kPrediction3: return FlipError{market.bn(), 1.0, e};
  }
  throw Error(ErrorKind::kConfigInvalid, "unhandled model");
}

inline std::vector<ResultRow> run_real(std::shared_ptr<const EmpiricalDistribution> viewing,
                                       const std::vector<RealModel>& models,
                                       std::shared_ptr<const EmpiricalDistribution> second,
                                       ExperimentConfig config) {
  if (!viewing) throw Error(ErrorKind::kEmptyDistribution, "no viewing distribution");
  if (models.empty()) throw Error(ErrorKind::kConfigInvalid, "no prediction models");
  const Day episodes = viewing->support_end();
  config.days = EmpiricalDays{viewing};
  config.error_models.clear();
  for (RealModel m : models) {
    config.error_models.push_back(real_error_model(m, config.market, episodes, second));
  }
  return finalize_rows(run_cells(config));
}

}  // namespace mssr
