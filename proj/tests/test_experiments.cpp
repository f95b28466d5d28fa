#include <gtest/gtest.h>

#include "mssr/experiments.hpp"

using namespace mssr;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.market = markets::six_shop();
  c.algorithms = {Algorithm::kDet, Algorithm::kRand, Algorithm::kBdoa};
  c.lambdas = {0.25, 0.5};
  c.days = UniformDays{300};
  c.error_models = {GaussianError{0, 0}, GaussianError{0, 100}};
  c.trials = 2000;
  c.master_seed = 17;
  return c;
}

const ResultRow& find(const std::vector<ResultRow>& rows, const std::string& alg, double lambda,
                      double sigma, long long m = 1) {
  for (const auto& r : rows) {
    if (r.algorithm == alg && r.lambda == lambda && r.sigma == sigma && r.m == m) return r;
  }
  throw std::runtime_error("row not found: " + alg);
}

}  // namespace

TEST(Seeding, StreamsDiffer) {
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(1, 2, 4));
  EXPECT_NE(trial_seed(1, 2, 3), trial_seed(2, 2, 3));
  EXPECT_EQ(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
  EXPECT_NE(cell_id(GaussianError{0, 1}, 1), cell_id(GaussianError{0, 2}, 1));
  EXPECT_NE(cell_id(GaussianError{0, 1}, 1), cell_id(GaussianError{0, 1}, 2));
}

TEST(ErrorModels, Draws) {
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(draw_prediction(perfect_prediction(), 42, rng), 42);
  EXPECT_DOUBLE_EQ(draw_prediction(ReverseError{24}, 5, rng), 19);
  EXPECT_DOUBLE_EQ(draw_prediction(ReverseError{24}, 24, rng), 0);
  EXPECT_DOUBLE_EQ(draw_prediction(FlipError{10, 1, 24}, 10, rng), 1);
  EXPECT_DOUBLE_EQ(draw_prediction(FlipError{10, 1, 24}, 9, rng), 24);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(draw_prediction(GaussianError{-50, 100}, 3, rng), 0.0);
  EXPECT_THROW(validate(ErrorModel{GaussianError{0, -1}}), Error);
}

TEST(Synthetic, RowsSortedAndBounded) {
  const auto rows = run_synthetic(small_config());
  // det and rand at 2 lambdas x 2 sigmas, plus one bdoa row.
  EXPECT_EQ(rows.size(), 9u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(),
                             [](const auto& a, const auto& b) { return a.key() < b.key(); }));
  for (const auto& r : rows) {
    EXPECT_GE(r.mean_cr, 1.0 - 1e-9);
    EXPECT_EQ(r.trials, 2000);
    EXPECT_DOUBLE_EQ(r.gamma, 300);
  }
}

TEST(Synthetic, PerfectPredictionsWithinConsistency) {
  auto c = small_config();
  c.algorithms = {Algorithm::kDet};
  c.lambdas = {0.1, 0.3, 0.5, 0.7, 0.9};
  c.error_models = {perfect_prediction()};
  const auto rows = run_synthetic(c);
  for (const auto& r : rows) {
    EXPECT_LE(r.mean_cr, det_single_bound(c.market, r.lambda).consistency_factor);
  }
}

TEST(Synthetic, DeterministicAcrossThreads) {
  auto c = small_config();
  const auto a = run_synthetic(c);
  c.threads = 3;
  const auto b = run_synthetic(c);
  EXPECT_EQ(a, b);
}

TEST(Synthetic, SeedMatters) {
  auto c = small_config();
  const auto a = run_synthetic(c);
  c.master_seed = 18;
  EXPECT_NE(a, run_synthetic(c));
}

TEST(Synthetic, ExactHasLowerStderrThanSampled) {
  auto c = small_config();
  c.algorithms = {Algorithm::kRand};
  const auto exact = run_synthetic(c);
  c.randomized_eval = RandomizedEval::kSampled;
  const auto sampled = run_synthetic(c);
  ASSERT_EQ(exact.size(), sampled.size());
  for (std::size_t i = 0; i < exact.size(); ++i) {
    EXPECT_LT(exact[i].stderr_cr, sampled[i].stderr_cr);
    // Same cells, so means agree up to sampling noise of the buy day.
    EXPECT_NEAR(exact[i].mean_cr, sampled[i].mean_cr, 4 * sampled[i].stderr_cr);
  }
}

TEST(Synthetic, BdoaIgnoresErrorModel) {
  const auto rows = run_cells(small_config());
  std::vector<double> bdoa;
  for (const auto& r : rows) {
    if (r.algorithm == "bdoa") bdoa.push_back(r.mean_cr);
  }
  ASSERT_EQ(bdoa.size(), 2u);
  EXPECT_EQ(bdoa[0], bdoa[1]);
  EXPECT_EQ(finalize_rows(rows).size(), rows.size() - 1);
}

TEST(Synthetic, ConfigValidation) {
  auto bad = small_config();
  bad.trials = 0;
  EXPECT_THROW(run_synthetic(bad), Error);
  bad = small_config();
  bad.lambdas = {1.0};
  EXPECT_THROW(run_synthetic(bad), Error);
  bad = small_config();
  bad.days = UniformDays{0.5};
  EXPECT_THROW(run_synthetic(bad), Error);
  bad = small_config();
  bad.algorithms = {Algorithm::kRand};
  bad.lambdas = {0.01};
  EXPECT_THROW(run_synthetic(bad), Error);
}

TEST(MultiSweep, RequiresGammaB1AndMultiAlgorithm) {
  ExperimentConfig c;
  c.market = markets::six_shop();
  c.algorithms = {Algorithm::kDetMulti};
  c.lambdas = {0.5};
  c.days = UniformDays{100};
  c.error_models = {perfect_prediction()};
  c.ms = {1, 2, 3};
  c.trials = 500;
  const auto rows = multi_prediction_sweep(c);
  EXPECT_EQ(rows.size(), 3u);
  c.days = UniformDays{300};
  EXPECT_THROW(multi_prediction_sweep(c), Error);
  c.days = UniformDays{100};
  c.algorithms = {Algorithm::kDet};
  EXPECT_THROW(multi_prediction_sweep(c), Error);
}

TEST(MultiSweep, NoPlusOneZeroDenominatorIsConfigError) {
  ExperimentConfig c;
  c.market = markets::six_shop();
  c.algorithms = {Algorithm::kDetMultiNoPlus};
  c.lambdas = {0.5};
  c.days = UniformDays{100};
  c.error_models = {perfect_prediction()};
  c.ms = {2};
  c.trials = 100;
  // Perfect predictions make z in {0, 2}; 2z - m = 0 cannot occur.
  EXPECT_NO_THROW(multi_prediction_sweep(c));
  c.error_models = {GaussianError{0, 100}};
  EXPECT_THROW(multi_prediction_sweep(c), Error);
}

TEST(Real, PerfectPredictionNearOne) {
  std::vector<double> mass(24, 0.0);
  for (std::size_t i = 0; i < 24; ++i) mass[i] = 1.0 / 24;
  auto dist = std::make_shared<const EmpiricalDistribution>(mass);
  ExperimentConfig c;
  c.market = markets::google_amazon();
  c.algorithms = {Algorithm::kDet, Algorithm::kBdoa};
  c.lambdas = {0.01};
  c.trials = 2000;
  const auto rows = run_real(dist, {RealModel::kPerfect}, nullptr, c);
  EXPECT_LE(find(rows, "det", 0.01, 0).mean_cr, 1.02);
  EXPECT_THROW(run_real(dist, {RealModel::kPrediction1}, nullptr, c), Error);
  EXPECT_THROW(run_real(nullptr, {RealModel::kPerfect}, nullptr, c), Error);
}

TEST(Real, ModelNames) {
  for (auto m : {RealModel::kPerfect, RealModel::kPrediction1, RealModel::kPrediction2,
                 RealModel::kPrediction3}) {
    EXPECT_EQ(parse_real_model(to_string(m)), m);
  }
  EXPECT_THROW(parse_real_model("prediction9"), Error);
}
