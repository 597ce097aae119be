#include "plas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "plas/errors.hpp"
#include "plas/io.hpp"

namespace plas {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::plas: return "PLAS";
    case Strategy::uniform: return "Uniform";
    case Strategy::oracle: return "Oracle";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view name) {
  for (Strategy s : {Strategy::plas, Strategy::uniform, Strategy::oracle}) {
    std::string lower(to_string(s));
    std::string given(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    std::transform(given.begin(), given.end(), given.begin(), ::tolower);
    if (lower == given) return s;
  }
  throw InvalidConfig("unknown strategy '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (scenario.arms < 4) throw InvalidConfig("K must be >= 4 for the quadrant scenario");
  if (scenario.dim < 2) throw InvalidConfig("d must be >= 2 for the quadrant scenario");
  if (budget < scenario.arms) throw InvalidConfig("budget T must be >= K");
  if (n_trials < 1) throw InvalidConfig("n_trials must be >= 1");
  if (strategies.empty()) throw InvalidConfig("at least one strategy is required");
  if (!(hyper.alpha > 0.0 && hyper.alpha < 0.5)) throw InvalidConfig("alpha must lie in (0, 1/2)");
  if (!(hyper.c_bar > 1.0)) throw InvalidConfig("c_bar must be > 1");
  if (hyper.neighbor_exponent &&
      !(*hyper.neighbor_exponent > 0.0 && *hyper.neighbor_exponent < 1.0)) {
    throw InvalidConfig("k_exponent must lie in (0, 1)");
  }
  if (!(scenario.context_variance >= 0.0)) throw InvalidConfig("context_variance must be >= 0");
}

namespace {

Matrix parse_sigma(const nlohmann::json& j, std::size_t arms) {
  constexpr std::size_t cells = 4;
  if (j.is_number()) return constant_sigma(cells, arms, j.get<double>());
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "unit") return constant_sigma(cells, arms, 1.0);
    if (name == "hetero") return heteroskedastic_sigma(cells, arms);
    throw InvalidConfig("unknown sigma preset '" + name + "'");
  }
  if (j.is_array()) {
    const auto row = j.get<std::vector<double>>();
    if (row.size() != arms) throw InvalidConfig("sigma array needs one entry per arm");
    return per_arm_sigma(cells, row);
  }
  if (j.is_object() && j.contains("per_cell")) return j.at("per_cell").get<Matrix>();
  throw InvalidConfig("sigma must be a number, an array, a preset name or {per_cell}");
}

nlohmann::json sigma_to_json(const Matrix& sigma) {
  if (sigma.empty()) return 1.0;
  const bool same_rows =
      std::all_of(sigma.begin(), sigma.end(), [&](const auto& r) { return r == sigma.front(); });
  if (same_rows) return sigma.front();
  return nlohmann::json{{"per_cell", sigma}};
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidConfig("config must be a JSON object");
  static const std::set<std::string> known{
      "K", "d", "T", "best_value", "base_value", "threshold", "sigma", "fix_quadrant_typo",
      "context_variance", "context_mean_range", "n_trials", "strategies", "seed", "alpha",
      "c_bar", "k_exponent", "output"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InvalidConfig("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    auto& s = c.scenario;
    s.arms = j.value("K", s.arms);
    s.dim = j.value("d", s.dim);
    s.best_value = j.value("best_value", s.best_value);
    s.base_value = j.value("base_value", s.base_value);
    s.threshold = j.value("threshold", s.threshold);
    s.fix_quadrant_typo = j.value("fix_quadrant_typo", s.fix_quadrant_typo);
    s.context_variance = j.value("context_variance", s.context_variance);
    s.context_mean_range = j.value("context_mean_range", s.context_mean_range);
    s.sigma = j.contains("sigma") ? parse_sigma(j.at("sigma"), s.arms)
                                  : constant_sigma(4, s.arms, 1.0);
    c.budget = j.value("T", c.budget);
    c.n_trials = j.value("n_trials", c.n_trials);
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& name : j.at("strategies")) {
        c.strategies.push_back(strategy_from_string(name.get<std::string>()));
      }
    }
    c.seed = j.value("seed", c.seed);
    c.hyper.alpha = j.value("alpha", c.hyper.alpha);
    c.hyper.c_bar = j.value("c_bar", c.hyper.c_bar);
    if (j.contains("k_exponent") && !j.at("k_exponent").is_null()) {
      c.hyper.neighbor_exponent = j.at("k_exponent").get<double>();
    }
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["K"] = c.scenario.arms;
  j["d"] = c.scenario.dim;
  j["T"] = c.budget;
  j["best_value"] = c.scenario.best_value;
  j["base_value"] = c.scenario.base_value;
  j["threshold"] = c.scenario.threshold;
  j["sigma"] = sigma_to_json(c.scenario.sigma);
  j["fix_quadrant_typo"] = c.scenario.fix_quadrant_typo;
  j["context_variance"] = c.scenario.context_variance;
  j["context_mean_range"] = c.scenario.context_mean_range;
  j["n_trials"] = c.n_trials;
  auto& names = j["strategies"] = nlohmann::ordered_json::array();
  for (Strategy s : c.strategies) names.push_back(to_string(s));
  j["seed"] = c.seed;
  j["alpha"] = c.hyper.alpha;
  j["c_bar"] = c.hyper.c_bar;
  j["k_exponent"] = c.hyper.neighbor_exponent ? nlohmann::ordered_json(*c.hyper.neighbor_exponent)
                                              : nlohmann::ordered_json(nullptr);
  return j;
}

std::uint64_t trial_seed(const ExperimentConfig& config, std::size_t trial) {
  return config.seed + trial;
}

BanditModel trial_model(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return draw_quadrant_model(config.scenario, rng);
}

PolicyClass quadrant_policy_class(const QuadrantSpec& spec) {
  return PolicyClass::tabular(CellPartition::quadrants(spec.threshold), spec.arms);
}

// ---------------------------------------------------------------------------
// Trials

TrialResult run_trial(Strategy strategy, const BanditModel& model, const PolicyClass& cls,
                      std::size_t budget, std::uint64_t seed, const HyperParameters& hyper,
                      bool keep_history) {
  if (budget < model.arms()) throw InvalidConfig("budget T must be >= K");
  if (cls.arms != model.arms()) throw InvalidConfig("policy class and model disagree on K");
  const auto start = std::chrono::steady_clock::now();

  SamplerOptions options;
  options.c_bar = hyper.c_bar;
  if (hyper.neighbor_exponent) {
    const double e = *hyper.neighbor_exponent;
    options.neighbor_count = [e](std::size_t n) {
      return std::max<std::size_t>(1, static_cast<std::size_t>(
                                          std::ceil(std::pow(static_cast<double>(n), e))));
    };
  }
  switch (strategy) {
    case Strategy::plas: options.rule = AssignmentRule::adaptive; break;
    case Strategy::uniform: options.rule = AssignmentRule::uniform; break;
    case Strategy::oracle:
      options.rule = AssignmentRule::known_variance;
      options.true_std = [&model](std::size_t arm, std::span<const double> x) {
        return model.conditional_std(x, arm);
      };
      break;
  }

  // Separate streams keep contexts identical across strategies for a seed.
  Rng context_rng = make_rng(seed, 1);
  Rng outcome_rng = make_rng(seed, 2);
  Rng assign_rng = make_rng(seed, 3);

  SamplerState state(model.arms(), model.dim(), options);
  for (std::size_t t = 0; t < budget; ++t) {
    const auto x = model.sample_context(context_rng);
    const auto assignment = as_step(state, x, assign_rng);
    const double y = model.potential_outcome(x, assignment.arm, outcome_rng);
    state.commit(x, assignment, y);
  }

  const auto scores = AipwScoreTable::from_history(state.history(), hyper.alpha);
  const auto contexts = state.history().contexts();
  Policy policy = train_policy(scores, contexts, cls);
  const double value = policy_value(policy, model);
  const double regret = simple_regret(policy, model);
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  TrialResult result{strategy, 0,      seed,    std::move(policy),
                     value,    regret, elapsed, std::nullopt};
  if (keep_history) result.history = state.history();
  return result;
}

SummaryStats summarize(std::span<const double> values) {
  SummaryStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  }
  s.ci_low = s.mean - 1.96 * s.se;
  s.ci_high = s.mean + 1.96 * s.se;
  return s;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("PLAS_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs job(i) for i in [0, n) on up to worker_count() threads; rethrows the
// first failure.
template <typename Job>
void parallel_for(std::size_t n, Job job) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<TrialResult> run_trials(const ExperimentConfig& config, bool keep_history) {
  const PolicyClass cls = quadrant_policy_class(config.scenario);
  const std::size_t n_strat = config.strategies.size();
  const std::size_t total = n_strat * config.n_trials;
  std::vector<std::optional<TrialResult>> slots(total);
  parallel_for(total, [&](std::size_t job) {
    const std::size_t s = job / config.n_trials;
    const std::size_t trial = job % config.n_trials;
    const auto seed = trial_seed(config, trial);
    const BanditModel model = trial_model(config, seed);
    auto r = run_trial(config.strategies[s], model, cls, config.budget, seed, config.hyper,
                       keep_history);
    r.trial = trial;
    slots[job] = std::move(r);
  });
  std::vector<TrialResult> out;
  out.reserve(total);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

std::vector<StrategySummary> summarize_trials(const ExperimentConfig& config,
                                              const std::vector<TrialResult>& trials) {
  std::vector<StrategySummary> out;
  for (Strategy s : config.strategies) {
    std::vector<double> values;
    std::vector<double> regrets;
    for (const auto& t : trials) {
      if (t.strategy != s) continue;
      values.push_back(t.policy_value);
      regrets.push_back(t.regret);
    }
    out.push_back({s, summarize(values), summarize(regrets)});
  }
  return out;
}

nlohmann::ordered_json stats_json(const SummaryStats& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["std"] = s.sd;
  j["se"] = s.se;
  j["ci95"] = {s.ci_low, s.ci_high};
  return j;
}

}  // namespace

std::string trials_csv(const ExperimentReport& report, bool record_timing) {
  std::ostringstream out;
  out << "strategy,trial,seed,policy_value,regret,wall_ms\n";
  for (const auto& t : report.trials) {
    out << to_string(t.strategy) << ',' << t.trial << ',' << t.seed << ','
        << format_double(t.policy_value) << ',' << format_double(t.regret) << ','
        << (record_timing ? format_double(std::round(t.wall_ms * 1000.0) / 1000.0) : "0")
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json aggregate_json(const ExperimentConfig& config,
                                      const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(config);
  auto& strategies = j["strategies"] = nlohmann::ordered_json::array();
  for (const auto& s : report.summary) {
    nlohmann::ordered_json e;
    e["strategy"] = to_string(s.strategy);
    e["policy_value"] = stats_json(s.policy_value);
    e["regret"] = stats_json(s.regret);
    strategies.push_back(std::move(e));
  }
  return j;
}

ExperimentReport run_experiment(const ExperimentConfig& config, bool write_outputs) {
  config.validate();
  if (write_outputs) ensure_writable_directory(config.output);

  ExperimentReport report;
  report.trials = run_trials(config, write_outputs && config.write_history);
  report.summary = summarize_trials(config, report.trials);
  if (!write_outputs) return report;

  write_text_file(config.output / "trials.csv", trials_csv(report, config.record_timing));
  write_text_file(config.output / "aggregate.json", aggregate_json(config, report).dump(2) + "\n");

  nlohmann::ordered_json policies = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) {
    nlohmann::ordered_json e;
    e["strategy"] = to_string(t.strategy);
    e["trial"] = t.trial;
    e["policy"] = policy_to_json(t.policy);
    policies.push_back(std::move(e));
  }
  write_text_file(config.output / "policies.json", policies.dump(2) + "\n");

  if (config.write_history) {
    for (const auto& t : report.trials) {
      const std::string stem =
          std::string(to_string(t.strategy)) + "_" + std::to_string(t.trial) + ".csv";
      std::ostringstream hist;
      write_history_csv(*t.history, hist);
      write_text_file(config.output / ("history_" + stem), hist.str());
      std::ostringstream scores;
      write_scores_csv(AipwScoreTable::from_history(*t.history, config.hyper.alpha), scores);
      write_text_file(config.output / ("scores_" + stem), scores.str());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sweep and bounds

std::vector<SweepRow> regret_scaling_sweep(const ExperimentConfig& config,
                                           std::span<const std::size_t> budgets,
                                           Strategy strategy) {
  if (budgets.empty()) throw InvalidConfig("sweep needs at least one budget");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw InvalidConfig("sweep budgets must be ascending");
  }
  std::vector<SweepRow> rows;
  for (std::size_t budget : budgets) {
    ExperimentConfig c = config;
    c.budget = budget;
    c.strategies = {strategy};
    c.write_history = false;
    const auto report = run_experiment(c, false);
    const auto& regret = report.summary.front().regret;
    rows.push_back({budget, regret.n, regret.mean, regret.se,
                    std::sqrt(static_cast<double>(budget)) * regret.mean});
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "budget,n_trials,mean_regret,se_regret,sqrt_t_regret\n";
  for (const auto& r : rows) {
    out << r.budget << ',' << r.n_trials << ',' << format_double(r.mean_regret) << ','
        << format_double(r.se_regret) << ',' << format_double(r.scaled_regret) << '\n';
  }
  return out.str();
}

BoundReport scenario_bound_report(const ExperimentConfig& config, double multiplier) {
  config.validate();
  const BanditModel model = trial_model(config, trial_seed(config, 0));
  const auto& cells = *model.cells();
  const auto complexity = natarajan_dimension(quadrant_policy_class(config.scenario));
  ContextSupport support{cells.masses, cells.stds};
  return make_bound_report(support, complexity.dimension, config.scenario.dim, multiplier);
}

}  // namespace plas
