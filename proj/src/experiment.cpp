#include "doco/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "doco/error.hpp"
#include "doco/learners.hpp"
#include "doco/meta.hpp"

namespace doco {

double BudgetRule::at(std::int64_t T) const {
  if (exponent == 0.0) return scale;
  return scale * std::pow(static_cast<double>(T), exponent);
}

Schedule ScheduleSpec::resolve(std::int64_t T, double scenario_budget) const {
  switch (kind) {
    case Kind::BetaPower: return BetaPower{beta};
    case Kind::PathTuned: return PathTuned{V ? V->at(T) : scenario_budget};
    case Kind::Fixed: return FixedGamma{gamma};
  }
  throw InternalInvariant("ScheduleSpec: unknown kind");
}

ScenarioSpec ExperimentConfig::spec_for(std::int64_t T, std::uint64_t seed) const {
  ScenarioSpec s = scenario;
  s.T = T;
  s.seed = seed;
  if (scenario_V) s.V = scenario_V->at(T);
  return s;
}

namespace {

struct BuiltLearner {
  std::unique_ptr<OnlineLearner<double>> learner;
  std::size_t experts = 0;
};

double resolve_epsilon(const AlgorithmSpec& a, const ConvexityProfile<double>& profile,
                       const FeasibleBall<double>& ball, int experts, EpsilonPreset fallback) {
  if (a.epsilon) return *a.epsilon;
  return epsilon_preset(a.epsilon_preset.value_or(fallback), profile, ball, experts);
}

NewtonConfig<double> newton_config(const AlgorithmSpec& a, double gamma,
                                   const ConvexityProfile<double>& profile,
                                   const FeasibleBall<double>& ball, int experts,
                                   EpsilonPreset fallback) {
  NewtonConfig<double> c;
  c.gamma = gamma;
  c.regime = a.regime;
  c.variant = variant_for(a.regime);
  c.eta = a.eta.value_or(max_eta(a.regime, profile, ball));
  c.epsilon = resolve_epsilon(a, profile, ball, experts, fallback);
  validate(c, profile, ball);
  return c;
}

BuiltLearner build_learner(const AlgorithmSpec& a, const ScenarioSpec& spec) {
  const ConvexityProfile<double> profile = family_profile(spec);
  const FeasibleBall<double> ball(spec.D, spec.n);
  const Eigen::VectorXd start = Eigen::VectorXd::Zero(spec.n);
  const double budget = spec.budget();
  BuiltLearner out;
  switch (a.type) {
    case AlgorithmType::Newton: {
      const double gamma = make_gamma(a.schedule.resolve(spec.T, budget), spec.T, spec.D);
      out.learner = std::make_unique<NewtonLearner<double>>(
          newton_config(a, gamma, profile, ball, 1, EpsilonPreset::One), start, ball);
      break;
    }
    case AlgorithmType::Gd: {
      GdConfig<double> c{a.rule, make_gamma(a.schedule.resolve(spec.T, budget), spec.T, spec.D),
                         profile.ell(), profile.u()};
      out.learner = std::make_unique<GdLearner<double>>(c, start, ball);
      break;
    }
    case AlgorithmType::Rls: {
      if (spec.kind == ScenarioKind::LowerBoundAdversary) {
        throw ContractViolation("rls needs least-squares losses; the adversary emits scalar losses");
      }
      const double gamma = make_gamma(a.schedule.resolve(spec.T, budget), spec.T, spec.D);
      out.learner = std::make_unique<RlsLearner<double>>(gamma, start, ball);
      break;
    }
    case AlgorithmType::Meta: {
      const ExpertGrid grid = build_grid(spec.T, spec.D, a.include_gamma_one);
      std::vector<std::unique_ptr<OnlineLearner<double>>> experts;
      for (double gamma : grid.gammas) {
        if (a.expert == ExpertFamily::Newton) {
          experts.push_back(std::make_unique<NewtonLearner<double>>(
              newton_config(a, gamma, profile, ball, static_cast<int>(grid.size()),
                            EpsilonPreset::InverseRhoSqDSqN),
              start, ball));
        } else {
          GdConfig<double> c{a.rule, gamma, profile.ell(), profile.u()};
          experts.push_back(std::make_unique<GdLearner<double>>(c, start, ball));
        }
      }
      double lambda = profile.ell() / (profile.G() * profile.G());
      if (a.expert == ExpertFamily::Newton && a.regime == NewtonRegime::ExpConcave) {
        lambda = profile.alpha();
      }
      if (a.lambda) lambda = *a.lambda;
      out.experts = experts.size();
      out.learner = std::make_unique<MetaLearner<double>>(std::move(experts), grid.prior, lambda);
      break;
    }
  }
  return out;
}

ComparatorTrace<double> build_comparator(const ComparatorSpec& c, const Scenario& s,
                                         const FeasibleBall<double>& ball) {
  switch (c.kind) {
    case ComparatorKind::FixedOptimum: return fixed_optimum(s.losses, ball);
    case ComparatorKind::PerRoundMinimizer: return per_round_minimizers(s.losses, ball);
    case ComparatorKind::Explicit:
      return explicit_comparator(s.path, ball,
                                 std::optional<double>(c.budget ? c.budget->at(s.spec.T)
                                                                : s.spec.budget()));
  }
  throw InternalInvariant("build_comparator: unknown kind");
}

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

std::string run_file_name(const std::string& alg, const std::string& scenario, std::int64_t T,
                          ComparatorKind comparator, std::uint64_t seed) {
  std::ostringstream os;
  os << alg << "__" << scenario << "__T" << T << "__" << to_string(comparator) << "__seed" << seed
     << ".csv";
  return os.str();
}

std::string round_csv(const LearnerTrace<double>& trace, const RegretReport<double>& report,
                      std::size_t experts) {
  std::string out = "t,loss,comparator_loss,cum_regret,eta_t,gamma";
  for (std::size_t i = 0; i < experts; ++i) out += ",weight_" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t i = 0; i < report.rounds.size(); ++i) {
    const auto& r = report.rounds[i];
    out += std::to_string(r.t);
    out += ',' + format_number(r.loss);
    out += ',' + format_number(r.comparator_loss);
    out += ',' + format_number(r.cum_regret);
    out += ',' + format_number(trace.etas[i]);
    out += ',' + format_number(trace.gammas[i]);
    if (experts > 0) {
      for (double w : trace.weights[i]) out += ',' + format_number(w);
    }
    out += '\n';
  }
  return out;
}

void attach_slope(SummaryRow& row, const RegretReport<double>& report) {
  std::vector<std::pair<double, double>> pts;
  for (std::int64_t c : prefix_checkpoints(row.T)) {
    pts.emplace_back(static_cast<double>(c), report.prefix(c));
  }
  int positive = 0;
  for (const auto& p : pts) positive += p.second > 0.0 ? 1 : 0;
  if (positive < 4) return;
  const GrowthFit fit = fit_growth(pts, GrowthScale::Power);
  row.slope = fit.slope;
  row.r2 = fit.r2;
}

struct Job {
  std::size_t horizon;
  std::size_t seed;
  std::size_t algorithm;
};

std::vector<SummaryRow> run_job(const ExperimentConfig& config, const Job& job) {
  const std::int64_t T = config.horizons[job.horizon];
  const std::uint64_t seed = config.seeds[job.seed];
  const AlgorithmSpec& alg = config.algorithms[job.algorithm];
  std::vector<SummaryRow> rows;
  auto blank = [&](const ComparatorSpec& c) {
    SummaryRow r;
    r.algorithm = alg.id;
    r.scenario = config.scenario_id;
    r.comparator = to_string(c.kind);
    r.seed = seed;
    r.T = T;
    return r;
  };
  try {
    const Scenario s = generate(config.spec_for(T, seed));
    const FeasibleBall<double> ball(s.spec.D, s.spec.n);
    BuiltLearner built = build_learner(alg, s.spec);
    const LearnerTrace<double> trace = simulate(*built.learner, s.losses);
    for (const auto& c : config.comparators) {
      SummaryRow row = blank(c);
      try {
        const ComparatorTrace<double> z = build_comparator(c, s, ball);
        const RegretReport<double> report = regret_of(trace.thetas, s.losses, z);
        row.path_length = report.path_length;
        row.final_regret = report.total;
        attach_slope(row, report);
        write_file_atomic(config.output_dir / run_file_name(alg.id, config.scenario_id, T, c.kind, seed),
                          round_csv(trace, report, built.experts));
      } catch (const std::exception& e) {
        row.status = sanitize(std::string("failed: ") + e.what());
      }
      rows.push_back(std::move(row));
    }
  } catch (const std::exception& e) {
    rows.clear();
    for (const auto& c : config.comparators) {
      SummaryRow row = blank(c);
      row.status = sanitize(std::string("failed: ") + e.what());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (config.horizons.empty()) throw ConfigError("config: at least one horizon T is required");
  if (config.algorithms.empty()) throw ConfigError("config: at least one algorithm is required");
  if (config.comparators.empty()) throw ConfigError("config: at least one comparator is required");
  if (config.seeds.empty()) throw ConfigError("config: at least one seed is required");
  for (std::int64_t T : config.horizons) {
    for (std::uint64_t seed : config.seeds) {
      const ScenarioSpec spec = config.spec_for(T, seed);
      try {
        spec.validate();
        for (const auto& a : config.algorithms) {
          try {
            build_learner(a, spec);
          } catch (const ContractViolation& e) {
            throw ContractViolation("algorithm '" + a.id + "': " + e.what());
          }
        }
      } catch (const ContractViolation& e) {
        throw ConfigError("T=" + std::to_string(T) + ": " + e.what());
      }
    }
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
  validate_config(config);
  std::filesystem::create_directories(config.output_dir);
  std::vector<Job> jobs;
  for (std::size_t h = 0; h < config.horizons.size(); ++h)
    for (std::size_t s = 0; s < config.seeds.size(); ++s)
      for (std::size_t a = 0; a < config.algorithms.size(); ++a) jobs.push_back({h, s, a});

  std::vector<std::vector<SummaryRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) results[i] = run_job(config, jobs[i]);
  };
  const int count = std::clamp<int>(workers, 1, static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentResult out;
  std::string summary = summary_header();
  for (auto& rows : results) {
    for (auto& r : rows) {
      if (r.status != "ok") ++out.failures;
      summary += format_summary_row(r);
      out.rows.push_back(std::move(r));
    }
  }
  write_file_atomic(config.output_dir / "summary.csv", summary);
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  const double a = std::fabs(x);
  const auto fmt = (a >= 1e-4 && a < 1e15) ? std::chars_format::fixed : std::chars_format::scientific;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, fmt);
  return std::string(buf, res.ptr);
}

std::string summary_header() {
  return "algorithm,scenario,comparator,seed,T,path_length,final_regret,slope,r2,status\n";
}

std::string format_summary_row(const SummaryRow& r) {
  const bool ok = r.status == "ok";
  std::string out = r.algorithm + ',' + r.scenario + ',' + r.comparator + ',' +
                    std::to_string(r.seed) + ',' + std::to_string(r.T) + ',';
  out += ok ? format_number(r.path_length) : "";
  out += ',';
  out += ok ? format_number(r.final_regret) : "";
  out += ',';
  out += r.slope ? format_number(*r.slope) : "";
  out += ',';
  out += r.r2 ? format_number(*r.r2) : "";
  out += ',' + r.status + '\n';
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("summary: bad ") + what + " value '" + s + "'");
  }
}

}  // namespace

std::vector<SummaryRow> read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open summary file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line + '\n' != summary_header()) {
    throw ConfigError("summary: unexpected header in " + path.string());
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 10) throw ConfigError("summary: expected 10 columns, got " + std::to_string(c.size()));
    SummaryRow r;
    r.algorithm = c[0];
    r.scenario = c[1];
    r.comparator = c[2];
    r.seed = static_cast<std::uint64_t>(parse_double(c[3], "seed"));
    r.T = static_cast<std::int64_t>(parse_double(c[4], "T"));
    r.status = c[9];
    if (r.status == "ok") {
      r.path_length = parse_double(c[5], "path_length");
      r.final_regret = parse_double(c[6], "final_regret");
    }
    if (!c[7].empty()) r.slope = parse_double(c[7], "slope");
    if (!c[8].empty()) r.r2 = parse_double(c[8], "r2");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<GroupFit> fit_summary(const std::vector<SummaryRow>& rows, GrowthScale scale) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::map<std::int64_t, std::pair<double, int>>> groups;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto& cell = groups[{r.algorithm, r.scenario, r.comparator}][r.T];
    cell.first += r.final_regret;
    cell.second += 1;
  }
  std::vector<GroupFit> out;
  for (const auto& [key, by_T] : groups) {
    if (by_T.size() < 2) continue;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [T, acc] : by_T) pts.emplace_back(static_cast<double>(T), acc.first / acc.second);
    GroupFit g;
    std::tie(g.algorithm, g.scenario, g.comparator) = key;
    g.horizons = static_cast<int>(by_T.size());
    try {
      g.fit = fit_growth(pts, scale);
    } catch (const ContractViolation&) {
      continue;
    }
    out.push_back(std::move(g));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace doco
