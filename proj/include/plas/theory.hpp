#pragma once

// Computable endpoints of the minimax analysis: lower/upper bound constants
// (coefficients of 1/sqrt(T)), optimal allocations, and Gaussian KL terms.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "plas/model.hpp"

namespace plas {

/// Finite-support context distribution with per-arm standard deviations at
/// every support point. The adversarial lower-bound instance uses uniform
/// masses 1/M over M shattered points.
struct ContextSupport {
  std::vector<double> masses;
  Matrix sigma;  // [point][arm]

  static ContextSupport uniform(Matrix sigma);
  std::size_t arms() const { return sigma.empty() ? 0 : sigma.front().size(); }
  void validate() const;
};

// (1/8) E[sqrt(M sum_a sigma_a(X)^2)]; holds for every K >= 2.
double general_lower_bound_constant(const ContextSupport& support, std::size_t complexity);

// (1/8) E[sqrt(M (sigma_1(X) + sigma_2(X))^2)]; K = 2 only.
double two_arm_lower_bound_constant(const ContextSupport& support, std::size_t complexity);

// The tighter of the two for the instance: two-arm form when K = 2.
double lower_bound_constant(const ContextSupport& support, std::size_t complexity);

// Same bound for a strategy that ignores contexts: sigma_a is replaced by the
// unconditional standard deviation sqrt(E[sigma_a(X)^2] + Var(mu_a(X))).
// `means` ([point][arm]) may be empty, meaning means do not vary with X.
double context_free_lower_bound_constant(const ContextSupport& support,
                                         std::size_t complexity, const Matrix& means = {});

/// constant_term + c_coefficient * multiplier; parametric when the universal
/// constant C enters (K >= 3).
struct BoundConstant {
  double constant_term = 0.0;
  double c_coefficient = 0.0;
  double multiplier = 1.0;
  bool parametric = false;
  double value() const { return constant_term + c_coefficient * multiplier; }
};

// (108.8 kappa + 870.4) E[sqrt(sum sigma^2)] for K >= 3 with kappa =
// C sqrt(ln(d) M); K = 2 uses (sigma_1 + sigma_2)^2 and kappa = 2.5 sqrt(M).
BoundConstant upper_bound_constant(const ContextSupport& support, std::size_t complexity,
                                   std::size_t dim, double multiplier = 1.0);

struct Allocation {
  std::vector<double> weights;
  double value = 0.0;
};

// K >= 3: min_w max_a sqrt(sigma_a^2 / w_a), solved by w ∝ sigma^2 with value
// sqrt(sum sigma^2). K = 2: min_w sqrt(sigma_1^2/w_1 + sigma_2^2/w_2), solved
// by w ∝ sigma with value sigma_1 + sigma_2.
Allocation solve_allocation(std::span<const double> std_devs);

// Objective that solve_allocation minimizes, evaluated at an arbitrary w.
double allocation_objective(std::span<const double> std_devs, std::span<const double> w);

// (mu_p - mu_q)^2 / (2 sigma^2)
double gaussian_kl(double mean_p, double mean_q, double sigma);

// E[L_T] = (T / 2M) gap^2 / (sigma^2 / w)
double expected_log_likelihood_ratio(double gap, double sigma, double w, std::size_t budget,
                                     std::size_t complexity);

struct BoundReport {
  std::size_t arms = 0;
  std::size_t complexity = 0;
  std::size_t dim = 0;
  std::string regime;  // "K=2" or "K>=3"
  double lower_bound_constant = 0.0;
  double general_lower_bound_constant = 0.0;
  double two_arm_lower_bound_constant = 0.0;  // K = 2 only, else 0
  double kappa = 0.0;
  BoundConstant upper_bound;
  std::vector<double> masses;
  std::vector<Allocation> optimal_allocation;  // per support point
};

BoundReport make_bound_report(const ContextSupport& support, std::size_t complexity,
                              std::size_t dim, double multiplier = 1.0);

nlohmann::ordered_json bound_report_to_json(const BoundReport& report);

}  // namespace plas
