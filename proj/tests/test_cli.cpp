#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doco/error.hpp"
#include "doco/experiment.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("doco_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kMinimal = R"({
  "scenario": {"id": "still", "kind": "stationary", "T": 100, "n": 2},
  "algorithms": [{"id": "rls", "type": "rls", "schedule": {"type": "fixed", "gamma": 0.9}}],
  "comparators": ["fixed_optimum"],
  "seeds": [0],
  "output_dir": "out"
})";

}  // namespace

TEST(NumberFormat, Cases) {
  EXPECT_EQ(doco::format_number(0.0), "0");
  EXPECT_EQ(doco::format_number(-0.0), "0");
  EXPECT_EQ(doco::format_number(1.5), "1.5");
  EXPECT_EQ(doco::format_number(0.1), "0.1");
  EXPECT_EQ(doco::format_number(100.0), "100");
  EXPECT_EQ(doco::format_number(1e-5), "1e-05");
  EXPECT_EQ(doco::format_number(1e15), "1e+15");
  EXPECT_EQ(doco::format_number(NAN), "nan");
  EXPECT_EQ(doco::format_number(INFINITY), "inf");
  EXPECT_EQ(doco::format_number(-INFINITY), "-inf");
  for (double x : {1.0 / 3.0, 2.718281828459045, 1e-300, 123456.789, -7e-4}) {
    EXPECT_EQ(std::stod(doco::format_number(x)), x);
  }
}

TEST(ConfigParse, MinimalAndDefaults) {
  const auto c = doco::parse_config(kMinimal, "/base");
  EXPECT_EQ(c.scenario_id, "still");
  EXPECT_EQ(c.horizons, std::vector<std::int64_t>{100});
  ASSERT_EQ(c.algorithms.size(), 1u);
  EXPECT_EQ(c.algorithms[0].type, doco::AlgorithmType::Rls);
  EXPECT_EQ(c.output_dir, fs::path("/base/out"));
  EXPECT_NO_THROW(doco::validate_config(c));
}

TEST(ConfigParse, Rejections) {
  auto bad = [](const std::string& text) {
    EXPECT_THROW(doco::validate_config(doco::parse_config(text)), doco::ConfigError) << text;
  };
  const std::string alg = R"([{"id": "a", "type": "rls", "schedule": {"type": "fixed", "gamma": 0.9}}])";
  const std::string tail = R"(, "comparators": ["fixed_optimum"], "seeds": [0], "output_dir": "o"})";
  bad("not json");
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 10, "n": 1, "colour": 1}, "algorithms": )" + alg + tail);
  bad(R"({"scenario": {"id": "s", "kind": "wobble", "T": 10, "n": 1}, "algorithms": )" + alg + tail);
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 1, "n": 1}, "algorithms": )" + alg + tail);
  bad(R"({"scenario": {"id": "a__b", "kind": "stationary", "T": 10, "n": 1}, "algorithms": )" + alg + tail);
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 10, "n": 1}, "algorithms": [{"id": "a", "type": "rls", "schedule": {"type": "fixed", "gamma": 1.5}}])" + tail);
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 10, "n": 1}, "algorithms": [{"id": "a", "type": "rls", "schedule": {"type": "fixed", "gamma": 0.5}}, {"id": "a", "type": "rls", "schedule": {"type": "fixed", "gamma": 0.5}}])" + tail);
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 10, "n": 1}, "algorithms": )" + alg +
      R"(, "comparators": ["fixed_optimum", "fixed_optimum"], "seeds": [0], "output_dir": "o"})");
  bad(R"({"scenario": {"id": "s", "kind": "stationary", "T": 10, "n": 1}, "algorithms": )" + alg +
      R"(, "comparators": ["fixed_optimum"], "seeds": [-1], "output_dir": "o"})");
  // least squares tracking learner on an adversary stream
  bad(R"({"scenario": {"id": "s", "kind": "lower_bound_adversary", "T": 100, "n": 1, "gamma0": 0.5}, "algorithms": )" + alg + tail);
}

TEST(Experiment, MinimalRunWritesCsvAndSummary) {
  const auto dir = scratch("minimal");
  auto c = doco::parse_config(kMinimal, dir);
  const auto res = doco::run_experiment(c, 1);
  EXPECT_EQ(res.failures, 0);
  const auto run = lines(slurp(dir / "out" / "rls__still__T100__fixed_optimum__seed0.csv"));
  ASSERT_EQ(run.size(), 101u);
  EXPECT_EQ(run[0], "t,loss,comparator_loss,cum_regret,eta_t,gamma");
  const auto summary = lines(slurp(dir / "out" / "summary.csv"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0] + "\n", doco::summary_header());
  const auto last = cells(run.back());
  const auto row = cells(summary[1]);
  EXPECT_EQ(row[6], last[3]);
  EXPECT_EQ(row[9], "ok");
  EXPECT_EQ(std::stod(last[5]), 0.9);
}

TEST(Experiment, MetaWeightsSumToOneAndReruns) {
  const auto dir = scratch("meta");
  const char* text = R"({
    "scenario": {"id": "walk", "kind": "random_walk", "T": [200, 400], "n": 2, "V": {"scale": 1, "exponent": 0.5}},
    "algorithms": [
      {"id": "m", "type": "meta", "expert": "newton", "regime": "exp_concave", "include_gamma_one": true},
      {"id": "g", "type": "gd", "rule": "strongly_convex", "schedule": {"type": "path_tuned"}}
    ],
    "comparators": ["fixed_optimum", "per_round_minimizer", {"kind": "explicit"}],
    "seeds": [1, 2],
    "output_dir": "out"
  })";
  const auto c = doco::parse_config(text, dir);
  const auto res = doco::run_experiment(c, 3);
  EXPECT_EQ(res.failures, 0);
  EXPECT_EQ(res.rows.size(), 2u * 2u * 2u * 3u);
  const auto run = lines(slurp(dir / "out" / "m__walk__T400__per_round_minimizer__seed2.csv"));
  ASSERT_EQ(run.size(), 401u);
  const auto head = cells(run[0]);
  ASSERT_GT(head.size(), 6u);
  EXPECT_EQ(head[6], "weight_1");
  for (std::size_t r = 1; r < run.size(); ++r) {
    const auto v = cells(run[r]);
    double s = 0;
    for (std::size_t k = 6; k < v.size(); ++k) s += std::stod(v[k]);
    ASSERT_NEAR(s, 1.0, 1e-9) << r;
  }
  const std::string first = slurp(dir / "out" / "summary.csv");
  const std::string csv = slurp(dir / "out" / "g__walk__T200__explicit__seed1.csv");
  doco::run_experiment(c, 1);
  EXPECT_EQ(slurp(dir / "out" / "summary.csv"), first);
  EXPECT_EQ(slurp(dir / "out" / "g__walk__T200__explicit__seed1.csv"), csv);

  const auto rows = doco::read_summary(dir / "out" / "summary.csv");
  ASSERT_EQ(rows.size(), res.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].algorithm, res.rows[i].algorithm);
    EXPECT_EQ(doco::format_number(rows[i].final_regret), doco::format_number(res.rows[i].final_regret));
  }
  const auto fits = doco::fit_summary(rows, doco::GrowthScale::Power);
  // static regret is negative here, so only the dynamic comparators fit
  EXPECT_EQ(fits.size(), 4u);
  for (const auto& f : fits) EXPECT_EQ(f.horizons, 2);
}

TEST(Experiment, AtomicWriteReplaces) {
  const auto dir = scratch("atomic");
  doco::write_file_atomic(dir / "a.txt", "one");
  doco::write_file_atomic(dir / "a.txt", "two");
  EXPECT_EQ(slurp(dir / "a.txt"), "two");
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
}
