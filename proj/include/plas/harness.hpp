#pragma once

// Replicated trials of PLAS / Uniform / Oracle on the quadrant scenario.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plas/model.hpp"
#include "plas/policy.hpp"
#include "plas/recommend.hpp"
#include "plas/sampling.hpp"
#include "plas/theory.hpp"

namespace plas {

enum class Strategy { plas, uniform, oracle };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

struct HyperParameters {
  double alpha = 0.25;  // U_T = T^alpha
  double c_bar = 10.0;
  // k = max(1, ceil(n^exponent)); unset means the exact 2/3 rule.
  std::optional<double> neighbor_exponent;
};

struct ExperimentConfig {
  QuadrantSpec scenario;
  std::size_t budget = 2000;
  std::size_t n_trials = 50;
  std::vector<Strategy> strategies{Strategy::plas, Strategy::uniform, Strategy::oracle};
  std::uint64_t seed = 0;
  HyperParameters hyper;
  std::filesystem::path output = "out";
  bool write_history = false;
  bool record_timing = false;

  void validate() const;
};

/// Reads the flat JSON config. Keys: K, d, T, best_value, base_value,
/// threshold, sigma, fix_quadrant_typo, context_variance, context_mean_range,
/// n_trials, strategies, seed, alpha, c_bar, k_exponent, output.
/// `sigma` is a number, a per-arm array, "unit", "hetero", or
/// {"per_cell": [[...], ...]}. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

// Trial i of an experiment runs with seed + i.
std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial);

// Scenario instance shared by every strategy of a trial.
BanditModel trial_model(const ExperimentConfig& config, std::uint64_t seed);

PolicyClass quadrant_policy_class(const QuadrantSpec& spec);

struct TrialResult {
  Strategy strategy = Strategy::plas;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Policy policy;
  double policy_value = 0.0;
  double regret = 0.0;
  double wall_ms = 0.0;
  std::optional<History> history;
};

/// Full exploration phase, AIPW scoring, policy training and exact valuation.
/// Bit-reproducible given (strategy, model, class, budget, seed, hyper).
/// Throws InvalidConfig when budget < K.
TrialResult run_trial(Strategy strategy, const BanditModel& model, const PolicyClass& cls,
                      std::size_t budget, std::uint64_t seed, const HyperParameters& hyper,
                      bool keep_history = false);

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct StrategySummary {
  Strategy strategy = Strategy::plas;
  SummaryStats policy_value;
  SummaryStats regret;
};

struct ExperimentReport {
  std::vector<TrialResult> trials;  // strategy-major, then trial index
  std::vector<StrategySummary> summary;
};

/// Runs n_trials per strategy; trials run concurrently (PLAS_THREADS caps the
/// worker count). With `write_outputs`, the output directory is checked
/// before any trial runs and receives trials.csv, aggregate.json,
/// policies.json and, if requested, history_<strategy>_<trial>.csv.
ExperimentReport run_experiment(const ExperimentConfig& config, bool write_outputs = true);

std::string trials_csv(const ExperimentReport& report, bool record_timing);
nlohmann::ordered_json aggregate_json(const ExperimentConfig& config,
                                      const ExperimentReport& report);

struct SweepRow {
  std::size_t budget = 0;
  std::size_t n_trials = 0;
  double mean_regret = 0.0;
  double se_regret = 0.0;
  double scaled_regret = 0.0;  // sqrt(T) * mean_regret
};

// Requires ascending budgets.
std::vector<SweepRow> regret_scaling_sweep(const ExperimentConfig& config,
                                           std::span<const std::size_t> budgets,
                                           Strategy strategy = Strategy::plas);

std::string sweep_csv(std::span<const SweepRow> rows);

// Bound constants for the scenario drawn with the config seed, taking the
// quadrant cells as the finite support and M from the tabular class.
BoundReport scenario_bound_report(const ExperimentConfig& config, double multiplier = 1.0);

// Worker count: PLAS_THREADS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

}  // namespace plas
