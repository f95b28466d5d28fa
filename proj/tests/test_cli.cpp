#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MSSR_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& rel) { return (fs::path(MSSR_DATA_DIR) / rel).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("mssr_cli_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Cli, DecideBdoa) {
  const auto r = run("decide --market " + data("markets/six_shop.csv") + " --algo bdoa");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("shop 6, buy day 75, worst-case CR 2.2333"), std::string::npos) << r.out;
}

TEST(Cli, DecideDetWithCost) {
  const auto r = run("decide --market " + data("markets/six_shop.csv") +
                     " --algo det --lambda 0.5 --predictions 90 --x 100");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("shop 6, buy day 38"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("ratio"), std::string::npos);
}

TEST(Cli, DecideJsonShowsOriginalCurrency) {
  const auto r = run("decide --market google-amazon --algo det --lambda 0.5 --predictions 3 --x 4 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("cost_original").get<double>(), 4 * 1.99, 1e-9);
  EXPECT_EQ(j.at("plan").at("shop"), 1);
}

TEST(Cli, DecideUsageErrors) {
  const auto bad_lambda = run("decide --market six-shop --algo det --lambda 1.0 --predictions 90");
  EXPECT_EQ(bad_lambda.code, 2);
  EXPECT_NE(bad_lambda.out.find("lambda must be in (0,1)"), std::string::npos) << bad_lambda.out;
  EXPECT_EQ(run("decide --market six-shop --algo det --predictions 90").code, 2);
  EXPECT_EQ(run("decide --market six-shop --algo det --lambda 0.5").code, 2);
  EXPECT_EQ(run("decide --market six-shop --algo nope").code, 2);
  EXPECT_EQ(run("decide --algo bdoa").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, VerifyWritesReport) {
  const auto out = temp_path("verify.json");
  const auto r = run("verify --market two-shop --algo det,rand-multi --lambda-grid 0.5 --x-max 200 "
                     "--y-max 200 --m 1,3 --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j.at("total_violations"), 0);
  EXPECT_EQ(j.at("reports").size(), 3u);
  for (const auto& rep : j.at("reports")) {
    EXPECT_LE(rep.at("max_observed_ratio").get<double>(), rep.at("robustness_factor").get<double>());
  }
  fs::remove(out);
}

TEST(Cli, VerifyFailureAndUsage) {
  // Fractional b_n: the break-even argument for BDOA is off by one day.
  EXPECT_EQ(run("verify --market google-amazon --algo bdoa").code, 1);
  EXPECT_EQ(run("verify --x-max 0").code, 2);
}

TEST(Cli, SweepDeterministic) {
  const auto a = temp_path("a.csv");
  const auto b = temp_path("b.csv");
  const std::string base = "sweep --config " + data("presets/fig1.json") + " --seed 42 --trials 300";
  ASSERT_EQ(run(base + " --threads 1 --out " + a.string()).code, 0);
  ASSERT_EQ(run(base + " --threads 3 --out " + b.string()).code, 0);
  const std::string text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.rfind("algorithm,lambda,delta,sigma,m,gamma,mean_cr,stderr,trials\n", 0), 0u);
  fs::remove(a);
  fs::remove(b);
}

TEST(Cli, SweepBadConfig) {
  EXPECT_EQ(run("sweep --config /nonexistent.json").code, 2);
}

TEST(Cli, RealPerfectNearOne) {
  const auto r = run("real --market " + data("markets/bigbang.csv") + " --viewership " +
                     data("viewership/bigbang_s12_sample.csv") +
                     " --model perfect --lambda 0.01 --trials 2000 --seed 1");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(r.out);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("det,", 0) != 0) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    EXPECT_NEAR(std::stod(f.at(6)), 1.0, 0.02);
    found = true;
  }
  EXPECT_TRUE(found) << r.out;
}

TEST(Cli, LambdaSearch) {
  const auto r = run("lambda-search --algo det --zeta 0 --json");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(r.out).at("lambda").get<double>(), 0.05);
  const auto inf = run("lambda-search --algo det --zeta inf --json");
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(inf.out).at("lambda").get<double>(), 0.95);
  EXPECT_EQ(run("lambda-search --algo bdoa").code, 2);
  EXPECT_EQ(run("lambda-search --zeta -1").code, 2);
}
