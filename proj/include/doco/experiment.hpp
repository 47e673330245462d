#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "doco/gd.hpp"
#include "doco/newton.hpp"
#include "doco/regret.hpp"
#include "doco/scenarios.hpp"

namespace doco {

/// V as a function of the horizon: scale * T^exponent (exponent 0 = constant).
struct BudgetRule {
  double scale = 0.0;
  double exponent = 0.0;
  double at(std::int64_t T) const;
};

enum class AlgorithmType { Newton, Gd, Rls, Meta };
enum class ExpertFamily { Newton, Gd };

/// Schedule whose PathTuned budget may be left to the scenario.
struct ScheduleSpec {
  enum class Kind { BetaPower, PathTuned, Fixed } kind = Kind::Fixed;
  double beta = 0.5;
  std::optional<BudgetRule> V;  // PathTuned only; defaults to the scenario budget
  double gamma = 1.0;

  Schedule resolve(std::int64_t T, double scenario_budget) const;
};

struct AlgorithmSpec {
  std::string id;
  AlgorithmType type = AlgorithmType::Rls;
  ScheduleSpec schedule;
  // newton and meta(newton)
  NewtonRegime regime = NewtonRegime::QuadBound;
  std::optional<double> eta;  // defaults to the regime maximum
  std::optional<double> epsilon;
  std::optional<EpsilonPreset> epsilon_preset;
  // gd and meta(gd)
  GdRule rule = GdRule::StronglyConvex;
  // meta
  ExpertFamily expert = ExpertFamily::Newton;
  bool include_gamma_one = false;
  std::optional<double> lambda;
};

struct ComparatorSpec {
  ComparatorKind kind = ComparatorKind::FixedOptimum;
  std::optional<BudgetRule> budget;  // explicit only; defaults to the scenario budget
};

struct ExperimentConfig {
  std::string scenario_id;
  ScenarioSpec scenario;  // T is overridden per horizon
  std::optional<BudgetRule> scenario_V;
  std::vector<std::int64_t> horizons;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<ComparatorSpec> comparators;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;

  /// The scenario spec for one (T, seed) cell.
  ScenarioSpec spec_for(std::int64_t T, std::uint64_t seed) const;
};

/// Parses the JSON config. Unknown keys and bad values throw ConfigError.
/// Relative output_dir is resolved against `base_dir`.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks every (T, seed) scenario and every algorithm against it.
void validate_config(const ExperimentConfig& config);

struct SummaryRow {
  std::string algorithm;
  std::string scenario;
  std::string comparator;
  std::uint64_t seed = 0;
  std::int64_t T = 0;
  double path_length = 0;
  double final_regret = 0;
  std::optional<double> slope;
  std::optional<double> r2;
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<SummaryRow> rows;
  int failures = 0;
};

/// Runs the grid with up to `workers` threads and writes the per-round CSVs
/// plus summary.csv into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers = 1);

/// Shortest round-trip decimal; fixed notation for 1e-4 <= |x| < 1e15,
/// scientific otherwise.
std::string format_number(double x);

std::string summary_header();
std::string format_summary_row(const SummaryRow& row);
std::vector<SummaryRow> read_summary(const std::filesystem::path& path);

struct GroupFit {
  std::string algorithm;
  std::string scenario;
  std::string comparator;
  GrowthFit fit;
  int horizons = 0;
};

/// Seed-averaged final regret per horizon, fitted per (algorithm, scenario,
/// comparator) group. Failed rows are skipped.
std::vector<GroupFit> fit_summary(const std::vector<SummaryRow>& rows, GrowthScale scale);

/// Writes `contents` to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace doco
