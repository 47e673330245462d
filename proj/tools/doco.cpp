// doco: experiment runner for the discounted online learners.
//
//   doco run <config.json>        run the grid, write CSVs and summary.csv
//   doco validate <config.json>   parse and check the config only
//   doco fit <summary.csv>        fit regret growth across horizons
//
// DOCO_WORKERS overrides the worker count for `run`.

#include <cstdlib>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "doco/error.hpp"
#include "doco/experiment.hpp"

namespace {

int worker_count(int requested) {
  if (const char* env = std::getenv("DOCO_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "doco: ignoring invalid DOCO_WORKERS='" << env << "'\n";
  }
  if (requested >= 1) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discounted online convex optimization experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed, horizon, comparator) cell");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("-j,--workers", workers, "Parallel runs (default: hardware threads)");

  auto* check = app.add_subcommand("validate", "Check a config without running it");
  check->add_option("config", config_path, "JSON experiment config")->required();

  std::string summary_path;
  std::string scale_name = "power";
  auto* fit = app.add_subcommand("fit", "Fit seed-averaged final regret against the horizon");
  fit->add_option("summary", summary_path, "summary.csv written by run")->required();
  fit->add_option("--scale", scale_name, "power (ln R vs ln T), loglog (ln R vs ln ln T), linear_log (R vs ln T)")
      ->check(CLI::IsMember({"power", "loglog", "linear_log"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*check) {
      const auto cfg = doco::load_config(config_path);
      doco::validate_config(cfg);
      std::cout << "ok: " << cfg.algorithms.size() << " algorithm(s), " << cfg.horizons.size()
                << " horizon(s), " << cfg.seeds.size() << " seed(s), " << cfg.comparators.size()
                << " comparator(s)\n";
      return 0;
    }
    if (*run) {
      const auto cfg = doco::load_config(config_path);
      const auto result = doco::run_experiment(cfg, worker_count(workers));
      for (const auto& r : result.rows) {
        if (r.status != "ok") {
          std::cerr << r.algorithm << " T=" << r.T << " seed=" << r.seed << " " << r.comparator
                    << ": " << r.status << '\n';
        }
      }
      std::cout << result.rows.size() << " run(s), " << result.failures << " failure(s); summary in "
                << (cfg.output_dir / "summary.csv").string() << '\n';
      return result.failures > 0 ? 2 : 0;
    }
    const doco::GrowthScale scale = scale_name == "loglog"       ? doco::GrowthScale::LogLog
                                    : scale_name == "linear_log" ? doco::GrowthScale::LinearInLog
                                                                 : doco::GrowthScale::Power;
    const auto fits = doco::fit_summary(doco::read_summary(summary_path), scale);
    std::cout << "algorithm,scenario,comparator,horizons,slope,intercept,r2,dropped\n";
    for (const auto& g : fits) {
      std::cout << g.algorithm << ',' << g.scenario << ',' << g.comparator << ',' << g.horizons << ','
                << doco::format_number(g.fit.slope) << ',' << doco::format_number(g.fit.intercept)
                << ',' << doco::format_number(g.fit.r2) << ',' << g.fit.dropped << '\n';
    }
    return 0;
  } catch (const doco::ConfigError& e) {
    std::cerr << "doco: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "doco: " << e.what() << '\n';
    return 2;
  }
}
