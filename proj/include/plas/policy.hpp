#pragma once

// Policies over a cell partition, their true values under a model, and
// complexity measures of policy classes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plas/model.hpp"

namespace plas {

enum class PolicyKind { tabular, threshold };

std::string_view to_string(PolicyKind kind);

/// Per-cell probability vectors over arms.
///
/// A threshold policy is a deterministic policy on a partition with a single
/// split. Every row is nonnegative and sums to 1 within 1e-12.
class Policy {
 public:
  Policy(PolicyKind kind, CellPartition partition, Matrix probs);

  static Policy deterministic(PolicyKind kind, CellPartition partition,
                              std::span<const std::size_t> arms, std::size_t n_arms);
  static Policy uniform(CellPartition partition, std::size_t n_arms);

  PolicyKind kind() const { return kind_; }
  const CellPartition& partition() const { return partition_; }
  std::size_t arms() const { return arms_; }
  std::size_t cell_count() const { return probs_.size(); }
  const Matrix& probabilities() const { return probs_; }

  std::span<const double> cell_probabilities(std::size_t cell) const;
  std::span<const double> probabilities(std::span<const double> context) const;

  // The arm carrying all mass in `cell`, if the row is a point mass.
  std::optional<std::size_t> deterministic_arm(std::size_t cell) const;
  bool is_deterministic() const;

  bool operator==(const Policy&) const = default;

 private:
  PolicyKind kind_;
  CellPartition partition_;
  Matrix probs_;
  std::size_t arms_;
};

/// JSON layout (keys in this order):
///   {"kind": "tabular"|"threshold",
///    "cells": {"splits": [{"dim": j, "cuts": [...]}, ...]},
///    "probs": [[p_1, ..., p_K], ...]}   one row per cell, arms 1..K
nlohmann::ordered_json policy_to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::ordered_json& j);

enum class PolicyFamily { tabular, threshold };

/// Exogenous policy class.
///
/// tabular: every deterministic assignment of arms to the cells of a fixed
/// partition (K^M members). threshold: a single cut on `dim`, chosen from
/// `candidate_cuts`, with an arm for each side.
struct PolicyClass {
  PolicyFamily family = PolicyFamily::tabular;
  std::size_t arms = 2;
  CellPartition partition;             // tabular
  std::size_t dim = 0;                 // threshold
  std::vector<double> candidate_cuts;  // threshold

  static PolicyClass tabular(CellPartition partition, std::size_t arms);
  static PolicyClass threshold(std::size_t dim, std::vector<double> candidate_cuts,
                               std::size_t arms);

  // Cells of the tabular partition; 2 regions for the threshold family.
  std::size_t cell_count() const;

  // All deterministic members, in a fixed order.
  std::vector<Policy> enumerate() const;
  // Number of deterministic members.
  double size() const;
};

struct PolicyValueOptions {
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
};

// True when policy_value/simple_regret evaluate in closed form: finite-support
// contexts, or a policy that is constant or defined on the model's own cell
// partition.
bool has_exact_value(const Policy& policy, const BanditModel& model);

// Q(pi) = E[sum_a pi(a|X) mu^a(X)]; exact when has_exact_value, else Monte Carlo.
double policy_value(const Policy& policy, const BanditModel& model,
                    const PolicyValueOptions& options = {});

// E[max_a mu^a(X)], the value of the best deterministic policy.
double optimal_value(const BanditModel& model, const PolicyValueOptions& options = {});

// Q(pi*) - Q(pi). The Monte Carlo path evaluates both on the same contexts.
double simple_regret(const Policy& policy, const BanditModel& model,
                     const PolicyValueOptions& options = {});

struct NatarajanResult {
  std::size_t dimension = 0;
  bool certified = false;
};

// Largest shattered set, certified by brute force over representative points
// when the class is small enough (at most 12 representatives and 2^20
// members); otherwise the analytic value with certified = false.
NatarajanResult natarajan_dimension(const PolicyClass& cls);

// Brute-force Natarajan dimension of a finite set of labelings of n points.
// labelings[i][j] is the label member i assigns to point j.
std::size_t shattering_dimension(const std::vector<std::vector<std::size_t>>& labelings,
                                 std::size_t n_points, std::size_t n_labels);

struct ComplexityBound {
  double value = 0.0;       // bound evaluated at `multiplier`
  double multiplier = 1.0;  // the universal constant C (K >= 3 only)
  bool parametric = false;  // true when the bound scales with C
};

// Entropy-integral bound kappa: 2.5 sqrt(M) for K = 2, C sqrt(ln(d) M) for K >= 3.
ComplexityBound entropy_integral_bound(std::size_t arms, std::size_t complexity,
                                       std::size_t dim, double multiplier = 1.0);

}  // namespace plas
