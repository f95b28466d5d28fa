// Command-line front end: decide, verify, sweep, real, lambda-search.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or validation error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mssr/mssr.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  if (text.empty()) return values;
  // start:stop:step
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) ||
        stop < start) {
      throw UsageError(what + ": expected start:stop:step, got '" + text + "'");
    }
    return mssr::lambda_grid(start, stop, step);
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": bad number '" + item + "'");
    }
  }
  return values;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string describe(const mssr::Plan& plan) {
  if (const auto* d = std::get_if<mssr::Decision>(&plan)) {
    if (!d->buy_day) return "shop " + std::to_string(d->shop) + ", rent every day (never buy)";
    return "shop " + std::to_string(d->shop) + ", buy day " + std::to_string(*d->buy_day);
  }
  const auto& p = std::get<mssr::RandomizedPolicy>(plan);
  std::string s = "shop " + std::to_string(p.shop) + ", buy day drawn from 1.." +
                  std::to_string(p.support_end()) + " (geometric)";
  if (p.clamped) s += " [support clamped to 1]";
  return s;
}

nlohmann::ordered_json plan_json(const mssr::Plan& plan) {
  nlohmann::ordered_json j;
  if (const auto* d = std::get_if<mssr::Decision>(&plan)) {
    j["type"] = "decision";
    j["shop"] = d->shop;
    j["buy_day"] = d->buy_day ? nlohmann::ordered_json(*d->buy_day) : nlohmann::ordered_json(nullptr);
  } else {
    const auto& p = std::get<mssr::RandomizedPolicy>(plan);
    j["type"] = "randomized";
    j["shop"] = p.shop;
    j["support_end"] = p.support_end();
    j["clamped"] = p.clamped;
    j["mass"] = p.mass;
  }
  return j;
}

// ---------------------------------------------------------------------------

struct DecideArgs {
  std::string market;
  std::string algo;
  std::optional<double> lambda;
  std::string predictions;
  std::optional<long long> x;
  bool json = false;
};

int run_decide(const DecideArgs& args) {
  const auto market = mssr::resolve_market(args.market);
  const auto algo = mssr::parse_algorithm(args.algo);
  if (mssr::uses_lambda(algo) && !args.lambda) {
    throw UsageError("--lambda is required for " + args.algo);
  }
  const double lambda = args.lambda.value_or(0.0);
  std::vector<double> predictions = parse_list(args.predictions, "--predictions");
  if (mssr::uses_predictions(algo) && predictions.empty()) {
    throw UsageError("--predictions is required for " + args.algo);
  }
  if (!mssr::is_multi(algo) && mssr::uses_predictions(algo) && predictions.size() != 1) {
    throw UsageError(args.algo + " takes exactly one prediction");
  }
  if (predictions.empty()) predictions.push_back(0.0);
  if (args.x && *args.x < 1) throw UsageError("--x must be >= 1");

  const mssr::PredictionSet set(predictions);
  const mssr::Plan plan = mssr::make_plan(algo, market, set, lambda);
  std::optional<mssr::BoundReport> bound;
  try {
    bound = mssr::bound_for(algo, market, lambda, static_cast<long long>(set.size()));
  } catch (const mssr::Error&) {
  }

  nlohmann::ordered_json j;
  j["algorithm"] = args.algo;
  if (mssr::uses_lambda(algo)) j["lambda"] = lambda;
  j["plan"] = plan_json(plan);
  j["scale"] = market.scale();
  if (bound) {
    j["consistency_factor"] = bound->consistency_factor;
    j["robustness_factor"] = bound->robustness_factor;
  }
  std::string cost_line;
  if (args.x) {
    const double cost = mssr::plan_cost(market, plan, *args.x);
    const double opt = mssr::opt_cost(market, *args.x);
    j["x"] = *args.x;
    j["cost"] = cost;
    j["cost_original"] = market.denormalize(cost);
    j["opt"] = opt;
    j["opt_original"] = market.denormalize(opt);
    j["ratio"] = cost / opt;
    cost_line = "x=" + std::to_string(*args.x) + ": cost " + fmt(cost) + " (original " +
                fmt(market.denormalize(cost)) + "), OPT " + fmt(opt) + " (original " +
                fmt(market.denormalize(opt)) + "), ratio " + fmt(cost / opt);
  }

  if (args.json) {
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << describe(plan);
  if (algo == mssr::Algorithm::kBdoa) std::cout << ", worst-case CR " << fmt(mssr::bdoa_cr(market), 5);
  std::cout << "\n";
  if (bound && algo != mssr::Algorithm::kBdoa) {
    std::cout << "consistency " << fmt(bound->consistency_factor) << ", robustness "
              << fmt(bound->robustness_factor) << "\n";
  }
  if (!cost_line.empty()) std::cout << cost_line << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string market = "two-shop";
  std::vector<std::string> algos;
  std::string lambda_grid = "0.1:0.9:0.1";
  long long x_max = 1000;
  long long y_max = 1000;
  std::vector<long long> ms = {1, 3, 5, 8};
  std::string out;
  unsigned threads = 0;
};

int run_verify(const VerifyArgs& args) {
  if (args.x_max < 1) throw UsageError("--x-max must be >= 1");
  if (args.y_max < 1) throw UsageError("--y-max must be >= 1");
  for (long long m : args.ms) {
    if (m < 1) throw UsageError("--m values must be >= 1");
  }
  const auto market = mssr::resolve_market(args.market);
  const auto grid = parse_list(args.lambda_grid, "--lambda-grid");
  std::vector<mssr::Algorithm> algos;
  if (args.algos.empty()) {
    algos = {mssr::Algorithm::kBdoa, mssr::Algorithm::kSimple, mssr::Algorithm::kDet,
             mssr::Algorithm::kRand, mssr::Algorithm::kDetMulti, mssr::Algorithm::kRandMulti};
  } else {
    for (const auto& a : args.algos) algos.push_back(mssr::parse_algorithm(a));
  }
  mssr::WorstCaseOptions options;
  options.x_max = args.x_max;
  options.market_id = args.market;
  options.threads = args.threads ? args.threads : mssr::default_thread_count();

  std::vector<mssr::ComplianceReport> reports;
  for (auto algo : algos) {
    if (algo == mssr::Algorithm::kDetMultiNoPlus) {
      throw UsageError("det-multi-noplus has no bound to verify");
    }
    if (algo == mssr::Algorithm::kBdoa) {
      reports.push_back(mssr::worst_case_ratio(algo, 0.0, market, mssr::NoPredictions{}, options));
      continue;
    }
    if (algo == mssr::Algorithm::kSimple) {
      reports.push_back(
          mssr::worst_case_ratio(algo, 0.0, market, mssr::SingleRange{1, args.y_max}, options));
      continue;
    }
    for (double lambda : grid) {
      if (!mssr::lambda_valid(algo, market, lambda)) continue;
      if (!mssr::is_multi(algo)) {
        reports.push_back(
            mssr::worst_case_ratio(algo, lambda, market, mssr::SingleRange{1, args.y_max}, options));
        continue;
      }
      for (long long m : args.ms) {
        if (algo == mssr::Algorithm::kRandMulti && !mssr::rand_multi_feasible(market, lambda, m)) continue;
        reports.push_back(mssr::worst_case_ratio(algo, lambda, market, mssr::MultiFamily{m}, options));
      }
    }
  }

  std::size_t violations = 0;
  for (const auto& r : reports) {
    violations += r.violation_count;
    std::cout << (r.passed() ? "ok   " : "FAIL ") << r.algorithm << " lambda=" << fmt(r.lambda)
              << " m=" << r.m << " " << r.grid << " cells=" << r.cells
              << " max_ratio=" << fmt(r.max_observed_ratio) << " min_margin=" << fmt(r.max_bound_margin)
              << " violations=" << r.violation_count << "\n";
  }
  if (!args.out.empty()) mssr::write_compliance(reports, args.out);
  std::cout << reports.size() << " reports, " << violations << " violations\n";
  return violations == 0 ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------------------

void emit_results(const std::vector<mssr::ResultRow>& rows, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << mssr::results_csv(rows);
  } else {
    mssr::write_results(rows, out);
  }
}

struct SweepArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  unsigned threads = 0;
  std::string out;
};

int run_sweep(const SweepArgs& args) {
  auto loaded = mssr::load_config(args.config);
  if (args.seed) loaded.config.master_seed = *args.seed;
  if (args.trials) loaded.config.trials = *args.trials;
  loaded.config.threads = args.threads ? args.threads : mssr::default_thread_count();
  emit_results(mssr::run_experiment(loaded), args.out);
  return kExitOk;
}

struct RealArgs {
  std::string market = "google-amazon";
  std::string viewership;
  std::string prediction_viewership;
  std::vector<std::string> models = {"perfect"};
  std::string lambdas = "0.01,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::vector<std::string> algos = {"det"};
  long long trials = 10'000;
  std::uint64_t seed = 0;
  std::string eval = "exact";
  unsigned threads = 0;
  std::string out;
};

int run_real_cmd(const RealArgs& args) {
  mssr::ExperimentConfig config;
  config.market_id = args.market;
  config.market = mssr::resolve_market(args.market);
  for (const auto& a : args.algos) config.algorithms.push_back(mssr::parse_algorithm(a));
  config.algorithms.push_back(mssr::Algorithm::kBdoa);
  config.lambdas = parse_list(args.lambdas, "--lambda");
  config.trials = args.trials;
  config.master_seed = args.seed;
  if (args.eval == "sampled") {
    config.randomized_eval = mssr::RandomizedEval::kSampled;
  } else if (args.eval != "exact") {
    throw UsageError("--eval must be exact or sampled");
  }
  config.threads = args.threads ? args.threads : mssr::default_thread_count();

  std::vector<std::string> warnings;
  auto viewing = std::make_shared<const mssr::EmpiricalDistribution>(
      mssr::viewership_to_distribution(mssr::load_viewership(args.viewership), &warnings));
  std::shared_ptr<const mssr::EmpiricalDistribution> second;
  if (!args.prediction_viewership.empty()) {
    second = std::make_shared<const mssr::EmpiricalDistribution>(
        mssr::viewership_to_distribution(mssr::load_viewership(args.prediction_viewership), &warnings));
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::vector<mssr::RealModel> models;
  for (const auto& m : args.models) models.push_back(mssr::parse_real_model(m));
  emit_results(mssr::run_real(viewing, models, second, config), args.out);
  return kExitOk;
}

struct LambdaSearchArgs {
  std::string algo = "det";
  std::string market = "two-shop";
  std::string zeta = "0";
  long long m = 1;
  std::string grid = "0.05:0.95:0.05";
  bool json = false;
};

int run_lambda_search(const LambdaSearchArgs& args) {
  const auto market = mssr::resolve_market(args.market);
  const auto algo = mssr::parse_algorithm(args.algo);
  if (!mssr::uses_lambda(algo) || algo == mssr::Algorithm::kDetMultiNoPlus) {
    throw UsageError(args.algo + " has no lambda bound to search");
  }
  double zeta = 0.0;
  if (args.zeta == "inf") {
    zeta = std::numeric_limits<double>::infinity();
  } else {
    const auto parsed = parse_list(args.zeta, "--zeta");
    if (parsed.size() != 1 || !(parsed[0] >= 0.0)) throw UsageError("--zeta must be a number >= 0 or inf");
    zeta = parsed[0];
  }
  const auto grid = parse_list(args.grid, "--grid");
  if (grid.empty()) throw UsageError("--grid is empty");
  const auto choice = mssr::grid_search_lambda(algo, market, zeta, grid, args.m);
  if (args.json) {
    nlohmann::ordered_json j;
    j["algorithm"] = args.algo;
    j["zeta_over_opt"] = args.zeta;
    j["lambda"] = choice.lambda;
    j["bound"] = choice.bound;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "lambda " << fmt(choice.lambda) << " bound " << fmt(choice.bound) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-shop ski rental: decisions, bound verification and experiments"};
  app.require_subcommand(1);

  DecideArgs decide;
  auto* decide_cmd = app.add_subcommand("decide", "Compute an algorithm's decision");
  decide_cmd->add_option("--market", decide.market, "Market CSV or built-in name")->required();
  decide_cmd->add_option("--algo", decide.algo, "bdoa|simple|det|rand|det-multi|rand-multi")->required();
  decide_cmd->add_option("--lambda", decide.lambda, "Trust parameter");
  decide_cmd->add_option("--predictions", decide.predictions, "Comma-separated predictions");
  decide_cmd->add_option("--x", decide.x, "Actual number of days, to report cost and ratio");
  decide_cmd->add_flag("--json", decide.json, "Machine-readable output");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check realized ratios against the bounds");
  verify_cmd->add_option("--market", verify.market, "Market CSV or built-in name");
  verify_cmd->add_option("--algo", verify.algos, "Algorithms (default: all with a bound)")->delimiter(',');
  verify_cmd->add_option("--lambda-grid", verify.lambda_grid, "start:stop:step or list");
  verify_cmd->add_option("--x-max", verify.x_max, "Largest x in the grid");
  verify_cmd->add_option("--y-max", verify.y_max, "Largest single prediction in the grid");
  verify_cmd->add_option("--m", verify.ms, "Prediction counts for multi-prediction algorithms")->delimiter(',');
  verify_cmd->add_option("--out", verify.out, "Compliance report JSON path");
  verify_cmd->add_option("--threads", verify.threads, "Worker threads (default MSSR_THREADS)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment config");
  sweep_cmd->add_option("--config", sweep.config, "Experiment JSON")->required();
  sweep_cmd->add_option("--seed", sweep.seed, "Override master_seed");
  sweep_cmd->add_option("--trials", sweep.trials, "Override trial count");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (default MSSR_THREADS)");
  sweep_cmd->add_option("--out", sweep.out, "Results CSV path (default stdout)");

  RealArgs real;
  auto* real_cmd = app.add_subcommand("real", "Viewership-driven experiment");
  real_cmd->add_option("--market", real.market, "Market CSV or built-in name");
  real_cmd->add_option("--viewership", real.viewership, "episode,viewers CSV")->required();
  real_cmd->add_option("--prediction-viewership", real.prediction_viewership,
                       "Second viewership CSV for prediction1");
  real_cmd->add_option("--model", real.models, "perfect|prediction1|prediction2|prediction3")->delimiter(',');
  real_cmd->add_option("--lambda", real.lambdas, "Lambda list or start:stop:step");
  real_cmd->add_option("--algo", real.algos, "Algorithms (bdoa baseline always added)")->delimiter(',');
  real_cmd->add_option("--trials", real.trials, "Trials per cell");
  real_cmd->add_option("--seed", real.seed, "Master seed");
  real_cmd->add_option("--eval", real.eval, "exact|sampled evaluation of randomized policies");
  real_cmd->add_option("--threads", real.threads, "Worker threads (default MSSR_THREADS)");
  real_cmd->add_option("--out", real.out, "Results CSV path (default stdout)");

  LambdaSearchArgs search;
  auto* search_cmd = app.add_subcommand("lambda-search", "Grid search for the bound-minimizing lambda");
  search_cmd->add_option("--algo", search.algo, "det|rand|det-multi|rand-multi");
  search_cmd->add_option("--market", search.market, "Market CSV or built-in name");
  search_cmd->add_option("--zeta", search.zeta, "Assumed zeta/OPT (number or inf)");
  search_cmd->add_option("--m", search.m, "Prediction count for multi-prediction bounds");
  search_cmd->add_option("--grid", search.grid, "start:stop:step or list");
  search_cmd->add_flag("--json", search.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*decide_cmd) return run_decide(decide);
    if (*verify_cmd) return run_verify(verify);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*real_cmd) return run_real_cmd(real);
    if (*search_cmd) return run_lambda_search(search);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mssr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
