// plas: command-line front end for the simulation harness.
//
//   plas run    [--config FILE] [--trials N] [--budget T] [--seed S] [--full] [--out DIR]
//   plas bounds [--config FILE] [--multiplier C] [--out FILE]
//   plas sweep  --budgets 1000,4000,16000 [--config FILE] [--trials N] [--seed S] [--out DIR]

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plas/errors.hpp"
#include "plas/harness.hpp"
#include "plas/io.hpp"
#include "plas/kernels.hpp"
#include "plas/log.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

plas::ExperimentConfig make_config(const CommonOptions& o) {
  plas::ExperimentConfig c =
      o.config_path.empty() ? plas::ExperimentConfig{} : plas::load_config(o.config_path);
  if (o.trials) c.n_trials = *o.trials;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output = *o.out;
  return c;
}

void print_summary(const plas::ExperimentConfig& c, const plas::ExperimentReport& report) {
  std::cout << "d=" << c.scenario.dim << " T=" << c.budget << " trials=" << c.n_trials
            << " -> " << c.output.string() << '\n';
  std::cout << std::left << std::setw(10) << "strategy" << std::setw(14) << "mean value"
            << std::setw(12) << "se" << std::setw(14) << "mean regret" << '\n';
  std::cout << std::fixed << std::setprecision(5);
  for (const auto& s : report.summary) {
    std::cout << std::setw(10) << plas::to_string(s.strategy) << std::setw(14)
              << s.policy_value.mean << std::setw(12) << s.policy_value.se << std::setw(14)
              << s.regret.mean << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
}

std::vector<std::size_t> parse_budgets(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const auto value = std::stoull(item, &pos);
    if (pos != item.size()) throw plas::InvalidConfig("bad budget '" + item + "'");
    out.push_back(static_cast<std::size_t>(value));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual fixed-budget best-arm identification: PLAS simulations"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  // run
  CommonOptions run_opts;
  std::optional<std::size_t> budget;
  bool full = false;
  bool history = false;
  bool timing = false;
  auto* run = app.add_subcommand("run", "Replicated trials of PLAS, Uniform and Oracle");
  run->add_option("--config", run_opts.config_path, "JSON experiment config");
  run->add_option("--trials", run_opts.trials, "Trials per strategy")->check(CLI::PositiveNumber);
  run->add_option("--budget", budget, "Budget T")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_opts.seed, "Base seed (trial i uses seed + i)");
  run->add_option("--out", run_opts.out, "Output directory");
  run->add_flag("--full", full, "Run (d,T) = (2,10000), (5,10000), (5,25000)");
  run->add_flag("--history", history, "Also write per-trial history and score CSVs");
  run->add_flag("--record-timing", timing, "Fill the wall_ms column (non-deterministic)");

  // bounds
  CommonOptions bounds_opts;
  double multiplier = 1.0;
  std::string bounds_out;
  auto* bounds = app.add_subcommand("bounds", "Lower/upper bound constants as JSON");
  bounds->add_option("--config", bounds_opts.config_path, "JSON experiment config");
  bounds->add_option("--seed", bounds_opts.seed, "Seed of the scenario instance");
  bounds->add_option("--multiplier", multiplier, "Universal constant C used for K >= 3");
  bounds->add_option("--out", bounds_out, "Write the report to this file instead of stdout");

  // sweep
  CommonOptions sweep_opts;
  std::string budgets_text;
  std::string strategy_name = "PLAS";
  auto* sweep = app.add_subcommand("sweep", "sqrt(T)-scaled mean regret over budgets");
  sweep->add_option("--budgets", budgets_text, "Comma-separated ascending budgets")->required();
  sweep->add_option("--config", sweep_opts.config_path, "JSON experiment config");
  sweep->add_option("--trials", sweep_opts.trials, "Trials per budget")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_opts.seed, "Base seed");
  sweep->add_option("--out", sweep_opts.out, "Output directory (sweep.csv)");
  sweep->add_option("--strategy", strategy_name, "PLAS, Uniform or Oracle");

  CLI11_PARSE(app, argc, argv);
  if (quiet) plas::set_warning_handler({});

  try {
    if (*run) {
      plas::ExperimentConfig config = make_config(run_opts);
      if (budget) config.budget = *budget;
      config.write_history = history;
      config.record_timing = timing;
      std::cerr << "kernel: " << plas::kernels::isa_name(plas::kernels::active_isa())
                << ", threads: " << plas::worker_count() << '\n';
      if (!full) {
        config.validate();
        print_summary(config, plas::run_experiment(config));
        return 0;
      }
      const std::pair<std::size_t, std::size_t> grid[] = {{2, 10000}, {5, 10000}, {5, 25000}};
      const auto root = config.output;
      for (const auto& [d, t] : grid) {
        plas::ExperimentConfig c = config;
        c.scenario.dim = d;
        c.budget = t;
        c.output = root / ("d" + std::to_string(d) + "_T" + std::to_string(t));
        c.validate();
        print_summary(c, plas::run_experiment(c));
      }
      return 0;
    }
    if (*bounds) {
      const auto config = make_config(bounds_opts);
      const auto text =
          plas::bound_report_to_json(plas::scenario_bound_report(config, multiplier)).dump(2) +
          "\n";
      if (bounds_out.empty()) {
        std::cout << text;
      } else {
        plas::write_text_file(bounds_out, text);
      }
      return 0;
    }
    if (*sweep) {
      plas::ExperimentConfig config = make_config(sweep_opts);
      const auto budgets = parse_budgets(budgets_text);
      const auto strategy = plas::strategy_from_string(strategy_name);
      plas::ensure_writable_directory(config.output);
      const auto rows = plas::regret_scaling_sweep(config, budgets, strategy);
      const auto csv = plas::sweep_csv(rows);
      plas::write_text_file(config.output / "sweep.csv", csv);
      std::cout << csv;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
