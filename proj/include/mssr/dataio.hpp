#pragma once

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mssr/analysis.hpp"
#include "mssr/distribution.hpp"
#include "mssr/error.hpp"
#include "mssr/experiments.hpp"
#include "mssr/market.hpp"
#include "mssr/policies.hpp"

namespace mssr {

// ---------------------------------------------------------------------------
// CSV plumbing. Lines starting with '#' and blank lines are ignored, so data
// files can carry provenance notes.

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

struct Row {
  std::size_t line = 0;  // 1-based line number in the file
  std::vector<std::string> fields;
};

// Reads the header (checked against `expected`) and the data rows.
inline std::vector<Row> read(std::istream& in, const std::vector<std::string>& expected,
                             const std::string& source) {
  std::vector<Row> rows;
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t);
    if (!header_seen) {
      if (!fields.empty() && fields[0].size() >= 3 &&
          fields[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
        fields[0].erase(0, 3);
      }
      if (fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw Error(ErrorKind::kParseError,
                    source + " line " + std::to_string(number) + ": expected header '" + want + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw Error(ErrorKind::kParseError, source + " row at line " + std::to_string(number) +
                                              ": expected " + std::to_string(expected.size()) +
                                              " fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({number, std::move(fields)});
  }
  return rows;
}

inline double parse_double(const std::string& text, const std::string& source, std::size_t line) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorKind::kParseError,
                source + " row at line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return value;
}

inline long long parse_int(const std::string& text, const std::string& source, std::size_t line) {
  long long value = 0;
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorKind::kParseError,
                source + " row at line " + std::to_string(line) + ": bad integer '" + text + "'");
  }
  return value;
}

// 17 significant digits: lossless for doubles.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path.string() + "'");
  return in;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::kIoError, "write failed for '" + path.string() + "'");
}

}  // namespace csv

// ---------------------------------------------------------------------------
// Markets: header `rent,buy`, raw prices.

inline Market parse_market(std::istream& in, const std::string& source = "market") {
  const auto rows = csv::read(in, {"rent", "buy"}, source);
  std::vector<RawShop> raw;
  for (const auto& row : rows) {
    raw.push_back({csv::parse_double(row.fields[0], source, row.line),
                   csv::parse_double(row.fields[1], source, row.line)});
  }
  return build_market(raw);
}

inline Market load_market(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_market(in, path.string());
}

inline std::string market_csv(const Market& market) {
  std::string out = "rent,buy\n";
  for (const auto& s : market.raw()) {
    out += csv::format_double(s.rent) + "," + csv::format_double(s.buy) + "\n";
  }
  return out;
}

inline void write_market(const Market& market, const std::filesystem::path& path) {
  csv::write_text(path, market_csv(market));
}

inline const std::vector<std::string>& builtin_market_names() {
  static const std::vector<std::string> names = {"six-shop", "two-shop", "google-amazon"};
  return names;
}

// A built-in market name, or a path to a market CSV (relative paths resolve
// against `base`).
inline Market resolve_market(const std::string& spec, const std::filesystem::path& base = {}) {
  if (spec == "six-shop") return markets::six_shop();
  if (spec == "two-shop") return markets::two_shop();
  if (spec == "google-amazon") return markets::google_amazon();
  std::filesystem::path p(spec);
  if (p.is_relative() && !base.empty()) p = base / p;
  return load_market(p);
}

// ---------------------------------------------------------------------------
// Viewership: header `episode,viewers`.

struct EpisodeCount {
  long long episode = 0;
  double viewers = 0.0;
};

inline std::vector<EpisodeCount> parse_viewership(std::istream& in,
                                                  const std::string& source = "viewership") {
  std::vector<EpisodeCount> counts;
  for (const auto& row : csv::read(in, {"episode", "viewers"}, source)) {
    const double v = csv::parse_double(row.fields[1], source, row.line);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kParseError, source + " row at line " + std::to_string(row.line) +
                                              ": viewers must be finite and >= 0");
    }
    counts.push_back({csv::parse_int(row.fields[0], source, row.line), v});
  }
  return counts;
}

inline std::vector<EpisodeCount> load_viewership(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_viewership(in, path.string());
}

// Survival reading: everyone counted at episode e watched at least e
// episodes, so viewers(e) - viewers(e+1) stopped after e. Counts that rise
// later in the season are clamped down to keep the sequence nonincreasing;
// each clamp is reported through `warnings`.
inline EmpiricalDistribution viewership_to_distribution(std::vector<EpisodeCount> counts,
                                                        std::vector<std::string>* warnings = nullptr) {
  if (counts.empty()) throw Error(ErrorKind::kEmptyDistribution, "no episodes");
  std::sort(counts.begin(), counts.end(),
            [](const EpisodeCount& a, const EpisodeCount& b) { return a.episode < b.episode; });
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].episode != static_cast<long long>(i + 1)) {
      throw Error(ErrorKind::kNonContiguousEpisodes,
                  "episodes must be exactly 1..E; found " + std::to_string(counts[i].episode) +
                      " at position " + std::to_string(i + 1));
    }
    if (!(counts[i].viewers >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "viewer counts must be >= 0");
    }
  }
  std::vector<double> alive(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    alive[i] = counts[i].viewers;
    if (i > 0 && alive[i] > alive[i - 1]) {
      if (warnings) {
        warnings->push_back("episode " + std::to_string(i + 1) + " has more viewers than episode " +
                            std::to_string(i) + "; clamped");
      }
      alive[i] = alive[i - 1];
    }
  }
  if (!(alive.front() > 0.0)) throw Error(ErrorKind::kAllZeroCounts, "no viewers at episode 1");
  std::vector<double> mass(alive.size());
  for (std::size_t i = 0; i < alive.size(); ++i) {
    const double next = i + 1 < alive.size() ? alive[i + 1] : 0.0;
    mass[i] = (alive[i] - next) / alive.front();
  }
  // Renormalize against rounding in the differences.
  const double total = compensated_sum(mass);
  for (double& p : mass) p /= total;
  return EmpiricalDistribution(std::move(mass));
}

// Distribution files: header `day,probability`.
inline EmpiricalDistribution parse_distribution(std::istream& in,
                                                const std::string& source = "distribution") {
  std::vector<double> mass;
  for (const auto& row : csv::read(in, {"day", "probability"}, source)) {
    const auto day = csv::parse_int(row.fields[0], source, row.line);
    if (day != static_cast<long long>(mass.size() + 1)) {
      throw Error(ErrorKind::kNonContiguousEpisodes,
                  source + " row at line " + std::to_string(row.line) + ": days must be 1..E in order");
    }
    mass.push_back(csv::parse_double(row.fields[1], source, row.line));
  }
  if (mass.empty()) throw Error(ErrorKind::kEmptyDistribution, source + " has no rows");
  return EmpiricalDistribution(std::move(mass));
}

inline std::string distribution_csv(const EmpiricalDistribution& dist) {
  std::string out = "day,probability\n";
  for (std::size_t i = 0; i < dist.mass().size(); ++i) {
    out += std::to_string(i + 1) + "," + csv::format_double(dist.mass()[i]) + "\n";
  }
  return out;
}

inline EmpiricalDistribution load_distribution(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_distribution(in, path.string());
}

inline void write_distribution(const EmpiricalDistribution& dist, const std::filesystem::path& path) {
  csv::write_text(path, distribution_csv(dist));
}

// ---------------------------------------------------------------------------
// Results CSV.

inline const std::vector<std::string>& results_header() {
  static const std::vector<std::string> header = {"algorithm", "lambda", "delta", "sigma", "m",
                                                  "gamma", "mean_cr", "stderr", "trials"};
  return header;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& h : results_header()) out += (out.empty() ? "" : ",") + h;
  out += "\n";
  for (const auto& r : rows) {
    out += r.algorithm + "," + csv::format_double(r.lambda) + "," + csv::format_double(r.delta) +
           "," + csv::format_double(r.sigma) + "," + std::to_string(r.m) + "," +
           csv::format_double(r.gamma) + "," + csv::format_double(r.mean_cr) + "," +
           csv::format_double(r.stderr_cr) + "," + std::to_string(r.trials) + "\n";
  }
  return out;
}

inline void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  csv::write_text(path, results_csv(rows));
}

inline std::vector<ResultRow> parse_results(std::istream& in, const std::string& source = "results") {
  std::vector<ResultRow> rows;
  for (const auto& row : csv::read(in, results_header(), source)) {
    const auto& f = row.fields;
    ResultRow r;
    r.algorithm = f[0];
    r.lambda = csv::parse_double(f[1], source, row.line);
    r.delta = csv::parse_double(f[2], source, row.line);
    r.sigma = csv::parse_double(f[3], source, row.line);
    r.m = csv::parse_int(f[4], source, row.line);
    r.gamma = csv::parse_double(f[5], source, row.line);
    r.mean_cr = csv::parse_double(f[6], source, row.line);
    r.stderr_cr = csv::parse_double(f[7], source, row.line);
    r.trials = csv::parse_int(f[8], source, row.line);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ResultRow> load_results(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_results(in, path.string());
}

// ---------------------------------------------------------------------------
// Compliance JSON.

inline nlohmann::ordered_json to_json(const ComplianceReport& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = r.algorithm;
  j["market"] = r.market;
  j["lambda"] = r.lambda;
  j["m"] = r.m;
  j["grid"] = r.grid;
  j["x_max"] = r.x_max;
  j["y_max"] = r.y_max;
  j["cells"] = r.cells;
  j["consistency_factor"] = r.consistency_factor;
  j["robustness_factor"] = r.robustness_factor;
  j["max_observed_ratio"] = r.max_observed_ratio;
  j["argmax_x"] = r.argmax_x;
  j["max_bound_margin"] = r.max_bound_margin;
  j["violation_count"] = r.violation_count;
  auto& list = j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) {
    nlohmann::ordered_json e;
    e["x"] = v.x;
    e["predictions"] = v.predictions;
    e["realized"] = v.realized;
    e["bound"] = v.bound;
    list.push_back(std::move(e));
  }
  return j;
}

inline ComplianceReport compliance_from_json(const nlohmann::ordered_json& j) {
  ComplianceReport r;
  r.algorithm = j.at("algorithm").get<std::string>();
  r.market = j.at("market").get<std::string>();
  r.lambda = j.at("lambda").get<double>();
  r.m = j.at("m").get<long long>();
  r.grid = j.at("grid").get<std::string>();
  r.x_max = j.at("x_max").get<Day>();
  r.y_max = j.at("y_max").get<Day>();
  r.cells = j.at("cells").get<std::size_t>();
  r.consistency_factor = j.at("consistency_factor").get<double>();
  r.robustness_factor = j.at("robustness_factor").get<double>();
  r.max_observed_ratio = j.at("max_observed_ratio").get<double>();
  r.argmax_x = j.at("argmax_x").get<Day>();
  r.max_bound_margin = j.at("max_bound_margin").is_null()
                           ? std::numeric_limits<double>::infinity()
                           : j.at("max_bound_margin").get<double>();
  r.violation_count = j.at("violation_count").get<std::size_t>();
  for (const auto& e : j.at("violations")) {
    r.violations.push_back({e.at("x").get<Day>(), e.at("predictions").get<std::vector<double>>(),
                            e.at("realized").get<double>(), e.at("bound").get<double>()});
  }
  return r;
}

inline std::string compliance_json(const std::vector<ComplianceReport>& reports) {
  nlohmann::ordered_json j;
  std::size_t total = 0;
  for (const auto& r : reports) total += r.violation_count;
  j["total_violations"] = total;
  auto& list = j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) list.push_back(to_json(r));
  return j.dump(2) + "\n";
}

inline void write_compliance(const std::vector<ComplianceReport>& reports,
                             const std::filesystem::path& path) {
  csv::write_text(path, compliance_json(reports));
}

inline std::vector<ComplianceReport> load_compliance(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  std::vector<ComplianceReport> reports;
  for (const auto& r : j.at("reports")) reports.push_back(compliance_from_json(r));
  return reports;
}

// ---------------------------------------------------------------------------
// Experiment config JSON. Scalars that depend on the market may be written
// as "b1", "bn", "gamma" or "<k>*b1" / "<k>*bn" / "<k>*gamma".

enum class ExperimentKind { kSynthetic, kMulti, kReal };

struct LoadedConfig {
  ExperimentKind kind = ExperimentKind::kSynthetic;
  ExperimentConfig config;
  std::vector<RealModel> real_models;
  std::shared_ptr<const EmpiricalDistribution> viewing;
  std::shared_ptr<const EmpiricalDistribution> second;
};

namespace detail {

inline double scalar(const nlohmann::json& v, const Market& market, double gamma,
                     const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw Error(ErrorKind::kConfigInvalid, field + " must be a number or expression");
  std::string s = v.get<std::string>();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  double factor = 1.0;
  std::string name = s;
  if (const auto star = s.find('*'); star != std::string::npos) {
    try {
      std::size_t used = 0;
      factor = std::stod(s.substr(0, star), &used);
      if (used != star) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfigInvalid, field + ": bad expression '" + s + "'");
    }
    name = s.substr(star + 1);
  }
  if (name == "b1") return factor * market.b1();
  if (name == "bn") return factor * market.bn();
  if (name == "gamma") return factor * gamma;
  throw Error(ErrorKind::kConfigInvalid, field + ": unknown symbol '" + name + "'");
}

template <typename Fn>
void for_each_value(const nlohmann::json& v, Fn&& fn) {
  if (v.is_array()) {
    for (const auto& e : v) fn(e);
  } else {
    fn(v);
  }
}

inline std::shared_ptr<const EmpiricalDistribution> distribution_from(
    const nlohmann::json& j, const std::filesystem::path& base) {
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  if (j.contains("viewership")) {
    return std::make_shared<const EmpiricalDistribution>(
        viewership_to_distribution(load_viewership(resolve(j.at("viewership").get<std::string>()))));
  }
  if (j.contains("distribution")) {
    return std::make_shared<const EmpiricalDistribution>(
        load_distribution(resolve(j.at("distribution").get<std::string>())));
  }
  throw Error(ErrorKind::kConfigInvalid, "expected a 'viewership' or 'distribution' path");
}

}  // namespace detail

inline LoadedConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  try {
    LoadedConfig out;
    auto& c = out.config;
    const std::string kind = j.value("experiment", std::string("synthetic"));
    if (kind == "synthetic") {
      out.kind = ExperimentKind::kSynthetic;
    } else if (kind == "multi") {
      out.kind = ExperimentKind::kMulti;
    } else if (kind == "real") {
      out.kind = ExperimentKind::kReal;
    } else {
      throw Error(ErrorKind::kConfigInvalid, "unknown experiment kind '" + kind + "'");
    }

    c.market_id = j.value("market", std::string("six-shop"));
    c.market = resolve_market(c.market_id, base);

    for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));

    double gamma = 1.0;
    if (out.kind == ExperimentKind::kReal) {
      out.viewing = detail::distribution_from(j.at("days"), base);
      c.days = EmpiricalDays{out.viewing};
      gamma = static_cast<double>(out.viewing->support_end());
    } else {
      gamma = detail::scalar(j.at("gamma"), c.market, 0.0, "gamma");
      c.days = UniformDays{gamma};
    }

    if (j.contains("lambdas")) {
      detail::for_each_value(j.at("lambdas"), [&](const nlohmann::json& v) {
        c.lambdas.push_back(detail::scalar(v, c.market, gamma, "lambdas"));
      });
    }

    if (out.kind == ExperimentKind::kReal) {
      if (j.contains("prediction1")) out.second = detail::distribution_from(j.at("prediction1"), base);
      for (const auto& m : j.at("models")) out.real_models.push_back(parse_real_model(m.get<std::string>()));
      for (RealModel m : out.real_models) {
        c.error_models.push_back(real_error_model(m, c.market, out.viewing->support_end(), out.second));
      }
    } else {
      for (const auto& e : j.at("error_models")) {
        const std::string ek = e.at("kind").get<std::string>();
        if (ek == "gaussian") {
          std::vector<double> deltas;
          std::vector<double> sigmas;
          detail::for_each_value(e.value("delta", nlohmann::json(0.0)), [&](const nlohmann::json& v) {
            deltas.push_back(detail::scalar(v, c.market, gamma, "delta"));
          });
          detail::for_each_value(e.value("sigma", nlohmann::json(0.0)), [&](const nlohmann::json& v) {
            sigmas.push_back(detail::scalar(v, c.market, gamma, "sigma"));
          });
          for (double d : deltas) {
            for (double s : sigmas) c.error_models.push_back(GaussianError{d, s});
          }
        } else if (ek == "reverse") {
          c.error_models.push_back(ReverseError{detail::scalar(e.at("total"), c.market, gamma, "total")});
        } else if (ek == "flip") {
          c.error_models.push_back(FlipError{detail::scalar(e.at("threshold"), c.market, gamma, "threshold"),
                                             detail::scalar(e.at("low"), c.market, gamma, "low"),
                                             detail::scalar(e.at("high"), c.market, gamma, "high")});
        } else if (ek == "empirical") {
          c.error_models.push_back(EmpiricalError{detail::distribution_from(e, base),
                                                  e.value("id", std::string("empirical"))});
        } else {
          throw Error(ErrorKind::kConfigInvalid, "unknown error model kind '" + ek + "'");
        }
      }
    }

    if (j.contains("m")) {
      c.ms.clear();
      detail::for_each_value(j.at("m"), [&](const nlohmann::json& v) { c.ms.push_back(v.get<long long>()); });
    }
    c.trials = j.value("trials", 10'000LL);
    c.master_seed = j.value("master_seed", std::uint64_t{0});
    const std::string eval = j.value("randomized_eval", std::string("exact"));
    if (eval == "exact") {
      c.randomized_eval = RandomizedEval::kExact;
    } else if (eval == "sampled") {
      c.randomized_eval = RandomizedEval::kSampled;
    } else {
      throw Error(ErrorKind::kConfigInvalid, "randomized_eval must be 'exact' or 'sampled'");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigInvalid, e.what());
  }
}

inline LoadedConfig load_config(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

inline std::vector<ResultRow> run_experiment(const LoadedConfig& loaded) {
  switch (loaded.kind) {
    case ExperimentKind::kSynthetic: return run_synthetic(loaded.config);
    case ExperimentKind::kMulti: return multi_prediction_sweep(loaded.config);
    case ExperimentKind::kReal:
      return run_real(loaded.viewing, loaded.real_models, loaded.second, loaded.config);
  }
  throw Error(ErrorKind::kConfigInvalid, "unhandled experiment kind");
}

}  // namespace mssr
