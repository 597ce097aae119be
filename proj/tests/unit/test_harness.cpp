#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "plas/errors.hpp"
#include "plas/harness.hpp"
#include "plas/log.hpp"

namespace fs = std::filesystem;

namespace {

using plas::ExperimentConfig;
using plas::Strategy;

ExperimentConfig small_config(std::size_t budget = 300, std::size_t trials = 3) {
  ExperimentConfig c;
  c.budget = budget;
  c.n_trials = trials;
  c.seed = 123;
  c.scenario.sigma = plas::heteroskedastic_sigma(4, 4);
  return c;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::path(::testing::TempDir()) / ("plas_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : {Strategy::plas, Strategy::uniform, Strategy::oracle}) {
    EXPECT_EQ(plas::strategy_from_string(plas::to_string(s)), s);
  }
  EXPECT_EQ(plas::strategy_from_string("oracle"), Strategy::oracle);
  EXPECT_THROW(plas::strategy_from_string("greedy"), plas::InvalidConfig);
}

TEST(Config, ParsesSigmaForms) {
  auto c = plas::config_from_json(nlohmann::json::parse(R"({"K": 5, "sigma": "hetero"})"));
  EXPECT_EQ(c.scenario.sigma[0], (std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5}));
  c = plas::config_from_json(nlohmann::json::parse(R"({"K": 4, "sigma": 2.5})"));
  EXPECT_EQ(c.scenario.sigma[3], (std::vector<double>(4, 2.5)));
  c = plas::config_from_json(nlohmann::json::parse(R"({"K": 4, "sigma": [1, 3, 2, 4]})"));
  EXPECT_EQ(c.scenario.sigma[1], (std::vector<double>{1, 3, 2, 4}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(plas::config_from_json(nlohmann::json::parse(R"({"budget": 10})")),
               plas::InvalidConfig);
  EXPECT_THROW(plas::config_from_json(nlohmann::json::parse(R"({"K": 4, "sigma": [1, 2, 3]})")),
               plas::InvalidConfig);
  EXPECT_THROW(plas::config_from_json(nlohmann::json::parse(R"({"alpha": 0.7})")),
               plas::InvalidConfig);
  EXPECT_THROW(plas::load_config("/nonexistent/config.json"), plas::IoError);
}

TEST(Config, JsonRoundTrip) {
  auto c = small_config();
  c.hyper.neighbor_exponent = 0.5;
  c.scenario.fix_quadrant_typo = true;
  auto back = plas::config_from_json(nlohmann::json::parse(plas::config_to_json(c).dump()));
  EXPECT_EQ(plas::config_to_json(back).dump(), plas::config_to_json(c).dump());
}

TEST(RunTrial, BudgetBelowArmCountIsInvalid) {
  auto c = small_config();
  auto m = plas::trial_model(c, 1);
  auto cls = plas::quadrant_policy_class(c.scenario);
  EXPECT_THROW(plas::run_trial(Strategy::plas, m, cls, 3, 1, c.hyper), plas::InvalidConfig);
}

TEST(RunTrial, Reproducible) {
  auto c = small_config();
  auto m = plas::trial_model(c, 77);
  auto cls = plas::quadrant_policy_class(c.scenario);
  auto a = plas::run_trial(Strategy::plas, m, cls, 400, 77, c.hyper, true);
  auto b = plas::run_trial(Strategy::plas, m, cls, 400, 77, c.hyper, true);
  EXPECT_EQ(a.policy, b.policy);
  EXPECT_EQ(a.policy_value, b.policy_value);
  std::ostringstream ha, hb;
  plas::write_history_csv(*a.history, ha);
  plas::write_history_csv(*b.history, hb);
  EXPECT_EQ(ha.str(), hb.str());
}

TEST(RunTrial, ValueWithinDesignRange) {
  ExperimentConfig c;
  auto m = plas::trial_model(c, 5);
  auto cls = plas::quadrant_policy_class(c.scenario);
  auto r = plas::run_trial(Strategy::plas, m, cls, 10000, 5, c.hyper);
  EXPECT_GE(r.policy_value, 4.5);
  EXPECT_LE(r.policy_value, 5.0 + 1e-12);
  EXPECT_NEAR(r.regret, 5.0 - r.policy_value, 1e-12);
}

TEST(RunTrial, OracleWithEqualSigmaAssignsUniformly) {
  ExperimentConfig c;
  auto m = plas::trial_model(c, 9);
  auto cls = plas::quadrant_policy_class(c.scenario);
  const std::size_t budget = 8000;
  auto r = plas::run_trial(Strategy::oracle, m, cls, budget, 9, c.hyper, true);
  const double se = std::sqrt(0.25 * 0.75 / budget);
  for (std::size_t a = 0; a < 4; ++a) {
    double freq = r.history->samples(a).size() / double(budget);
    EXPECT_LT(std::abs(freq - 0.25), 3 * se) << "arm " << a;
  }
}

TEST(Summarize, Moments) {
  std::vector<double> v{1, 2, 3, 4};
  auto s = plas::summarize(v);
  EXPECT_EQ(s.n, 4u);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.se, s.sd / 2, 1e-15);
  EXPECT_NEAR(s.ci_high - s.ci_low, 2 * 1.96 * s.se, 1e-15);
  std::vector<double> one{4.2};
  EXPECT_EQ(plas::summarize(one).se, 0.0);
}

TEST(Experiment, SingleTrialAggregateEqualsTrial) {
  auto c = small_config(300, 1);
  auto r = plas::run_experiment(c, false);
  ASSERT_EQ(r.trials.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(r.summary[s].policy_value.mean, r.trials[s].policy_value);
    EXPECT_EQ(r.summary[s].regret.mean, r.trials[s].regret);
  }
}

TEST(Experiment, WritesOutputsDeterministically) {
  auto c = small_config();
  c.write_history = true;
  c.output = scratch("exp_a");
  plas::run_experiment(c);
  auto first = c.output;
  c.output = scratch("exp_b");
  plas::run_experiment(c);
  for (const char* name : {"trials.csv", "aggregate.json", "policies.json",
                           "history_PLAS_0.csv", "scores_Oracle_2.csv"}) {
    ASSERT_TRUE(fs::exists(first / name)) << name;
    EXPECT_EQ(slurp(first / name), slurp(c.output / name)) << name;
  }
  std::string trials = slurp(first / "trials.csv");
  EXPECT_EQ(trials.substr(0, trials.find('\n')), "strategy,trial,seed,policy_value,regret,wall_ms");
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 10);
}

TEST(Experiment, UnwritableOutputFailsBeforeRunning) {
  fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  auto c = small_config();
  c.output = blocker / "sub";
  EXPECT_THROW(plas::run_experiment(c), plas::IoError);
}

TEST(Sweep, ZeroGapModelHasZeroRegret) {
  auto c = small_config(300, 4);
  c.scenario.best_value = c.scenario.base_value;
  std::vector<std::size_t> budgets{50, 200};
  auto rows = plas::regret_scaling_sweep(c, budgets);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.mean_regret, 0.0);
    EXPECT_EQ(r.scaled_regret, 0.0);
  }
}

TEST(Sweep, ShapeAndValidation) {
  auto c = small_config(300, 2);
  std::vector<std::size_t> one{200};
  auto rows = plas::regret_scaling_sweep(c, one);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].scaled_regret, std::sqrt(200.0) * rows[0].mean_regret, 1e-12);
  EXPECT_EQ(plas::sweep_csv(rows).rfind("budget,n_trials,mean_regret,se_regret,sqrt_t_regret\n", 0), 0u);
  std::vector<std::size_t> descending{400, 200};
  EXPECT_THROW(plas::regret_scaling_sweep(c, descending), std::invalid_argument);
}

TEST(BoundsReport, QuadrantScenarioUsesFourCells) {
  auto r = plas::scenario_bound_report(small_config());
  EXPECT_EQ(r.arms, 4u);
  EXPECT_EQ(r.complexity, 4u);
  EXPECT_EQ(r.regime, "K>=3");
  double total = 0;
  for (double m : r.masses) total += m;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

#ifdef PLAS_CLI_PATH
int run_cli(const std::string& args, const fs::path& capture) {
  std::string cmd = std::string(PLAS_CLI_PATH) + " -q " + args + " > " + capture.string() +
                    " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name) {
  fs::path p = scratch(name);
  std::ofstream(p) << R"({"K": 4, "d": 2, "T": 250, "n_trials": 3, "sigma": "hetero", "seed": 4})";
  return p;
}

TEST(Cli, RunIsByteIdentical) {
  auto cfg = write_config("cli_cfg.json");
  auto a = scratch("cli_run_a"), b = scratch("cli_run_b");
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + a.string() + " --history",
                    scratch("cli_log_a")), 0);
  ASSERT_EQ(run_cli("run --config " + cfg.string() + " --out " + b.string() + " --history",
                    scratch("cli_log_b")), 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    ++compared;
  }
  EXPECT_GE(compared, 3u + 2u * 9u);
}

TEST(Cli, BoundsAndSweepAreByteIdentical) {
  auto cfg = write_config("cli_cfg2.json");
  auto o1 = scratch("cli_bounds_1"), o2 = scratch("cli_bounds_2");
  ASSERT_EQ(run_cli("bounds --config " + cfg.string(), o1), 0);
  ASSERT_EQ(run_cli("bounds --config " + cfg.string(), o2), 0);
  EXPECT_EQ(slurp(o1), slurp(o2));
  EXPECT_NO_THROW((void)nlohmann::json::parse(slurp(o1)));

  auto s1 = scratch("cli_sweep_1"), s2 = scratch("cli_sweep_2");
  ASSERT_EQ(run_cli("sweep --budgets 100,200 --trials 2 --config " + cfg.string() + " --out " +
                        s1.string(), scratch("cli_log_c")), 0);
  ASSERT_EQ(run_cli("sweep --budgets 100,200 --trials 2 --config " + cfg.string() + " --out " +
                        s2.string(), scratch("cli_log_d")), 0);
  EXPECT_EQ(slurp(s1 / "sweep.csv"), slurp(s2 / "sweep.csv"));
}

TEST(Cli, ErrorsExitNonZero) {
  auto log = scratch("cli_err");
  EXPECT_EQ(run_cli("run --config /nonexistent.json", log), 1);
  EXPECT_NE(slurp(log).find("error:"), std::string::npos);
}
#endif

}  // namespace
