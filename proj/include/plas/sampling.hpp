#pragma once

// Adaptive sampling: online k-NN moment estimates, truncated variances,
// target-ratio estimation and randomized arm assignment.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "plas/rng.hpp"

namespace plas {

/// One exploration round. `w`, `mu_hat` and `sigma_hat` were computed from
/// rounds before `t` and frozen before the outcome was observed.
struct Record {
  std::size_t t = 0;  // 1-based round
  std::vector<double> context;
  std::size_t arm = 0;  // 0-based
  double outcome = 0.0;
  double xi = 0.0;
  std::vector<double> w;
  std::vector<double> mu_hat;
  std::vector<double> sigma_hat;
};

/// Past observations of one arm, stored column-major for distance kernels.
struct ArmSamples {
  std::vector<std::vector<double>> columns;  // [dim][i]
  std::vector<double> outcomes;
  std::vector<std::size_t> rounds;
  std::vector<const double*> column_ptrs() const;
  std::size_t size() const { return outcomes.size(); }
};

/// Exploration-phase data, records 1..size() without gaps.
class History {
 public:
  History(std::size_t arms, std::size_t dim);

  // Validates round numbering, dimensions and that w sums to 1 (1e-12).
  void append(Record record);

  std::size_t size() const { return records_.size(); }
  std::size_t arms() const { return arms_; }
  std::size_t dim() const { return dim_; }
  std::span<const Record> records() const { return records_; }
  const ArmSamples& samples(std::size_t arm) const { return per_arm_.at(arm); }

  std::vector<std::vector<double>> contexts() const;

 private:
  std::size_t arms_;
  std::size_t dim_;
  std::vector<Record> records_;
  std::vector<ArmSamples> per_arm_;
};

// Columns: t, x_1..x_d, arm (1-based), y, xi, w_1..w_K, mu_1..mu_K, sigma_1..sigma_K
void write_history_csv(const History& history, std::ostream& out);

struct MomentEstimate {
  double mean = 0.0;           // mu_hat, truncated to [-c_bar, c_bar]
  double second_moment = 0.0;  // nu_hat, truncated to [0, c_bar^2 + c_bar]
};

// Averages Y and Y^2 over the min(k, n_arm) past contexts of `arm` nearest to
// `context` (Euclidean; ties go to the earlier round).
// Throws EstimatorUnavailable when the arm has no records.
MomentEstimate knn_moment_estimates(const History& history,
                                    std::span<const double> context, std::size_t arm,
                                    std::size_t k, double c_bar);

// thre(nu - mu^2, c_bar, 1/c_bar); always in [1/c_bar, c_bar].
double variance_estimate(double mu_hat, double nu_hat, double c_bar);

// K = 2: w_a = s_a / (s_1 + s_2). K >= 3: w_a = s_a^2 / sum_b s_b^2.
std::vector<double> target_ratio(std::span<const double> std_devs);

// Arm 0 if xi <= w_0, else the arm a with xi in (sum_{b<a} w_b, sum_{b<=a} w_b].
std::size_t draw_arm(std::span<const double> w, double xi);

// max(1, ceil(n^{2/3})), evaluated exactly.
std::size_t default_neighbor_count(std::size_t n_arm);

enum class AssignmentRule {
  adaptive,        // estimated target ratio (PLAS)
  uniform,         // 1/K throughout
  known_variance,  // target ratio of the true standard deviations (Oracle)
};

using StdDevFunction =
    std::function<double(std::size_t arm, std::span<const double> context)>;

struct SamplerOptions {
  double c_bar = 10.0;
  AssignmentRule rule = AssignmentRule::adaptive;
  std::function<std::size_t(std::size_t)> neighbor_count = default_neighbor_count;
  StdDevFunction true_std;  // required for known_variance
};

struct Assignment {
  std::size_t arm = 0;
  double xi = 0.0;
  std::vector<double> w;
  std::vector<double> mu_hat;
  std::vector<double> sigma_hat;
};

/// Single-owner sequential sampler state.
class SamplerState {
 public:
  SamplerState(std::size_t arms, std::size_t dim, SamplerOptions options = {});

  const History& history() const { return history_; }
  const SamplerOptions& options() const { return options_; }
  std::size_t arms() const { return history_.arms(); }
  std::size_t next_round() const { return history_.size() + 1; }

  // Appends round next_round() once the outcome of `assignment` is known.
  void commit(std::span<const double> context, const Assignment& assignment,
              double outcome);

 private:
  SamplerOptions options_;
  History history_;
};

/// Assignment for round t = next_round().
///
/// t <= K pulls arm t-1 with w uniform (mu_hat = 0, sigma_hat = 1 stored).
/// Later rounds estimate (mu_hat, nu_hat) per arm by k-NN, derive w from the
/// configured rule, draw xi ~ U[0,1] and return draw_arm(w, xi).
Assignment as_step(const SamplerState& state, std::span<const double> context, Rng& rng);

}  // namespace plas
