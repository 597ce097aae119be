#include "plas/theory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "plas/policy.hpp"
#include "plas/sampling.hpp"

namespace plas {

ContextSupport ContextSupport::uniform(Matrix sigma) {
  const auto n = static_cast<double>(sigma.size());
  ContextSupport s{std::vector<double>(sigma.size(), 1.0 / n), std::move(sigma)};
  s.validate();
  return s;
}

void ContextSupport::validate() const {
  if (sigma.empty() || masses.size() != sigma.size()) {
    throw std::invalid_argument("ContextSupport: need one mass per support point");
  }
  const std::size_t k = arms();
  if (k < 2) throw std::invalid_argument("ContextSupport: need K >= 2");
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i].size() != k) throw std::invalid_argument("ContextSupport: ragged sigma");
    for (double s : sigma[i]) {
      if (!(s > 0.0)) throw std::invalid_argument("ContextSupport: sigma must be > 0");
    }
    if (!(masses[i] >= 0.0)) throw std::invalid_argument("ContextSupport: negative mass");
    total += masses[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("ContextSupport: masses sum");
}

namespace {

double sum_squares(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

double require_complexity(std::size_t complexity) {
  if (complexity < 1) throw std::invalid_argument("bound: complexity M must be >= 1");
  return static_cast<double>(complexity);
}

// E[sqrt(sum sigma^2)] or, for K = 2, E[sigma_1 + sigma_2]
double leading_factor(const ContextSupport& support, bool two_arm) {
  double e = 0.0;
  for (std::size_t i = 0; i < support.sigma.size(); ++i) {
    const auto& s = support.sigma[i];
    e += support.masses[i] * (two_arm ? s[0] + s[1] : std::sqrt(sum_squares(s)));
  }
  return e;
}

}  // namespace

double general_lower_bound_constant(const ContextSupport& support, std::size_t complexity) {
  support.validate();
  const double m = require_complexity(complexity);
  double e = 0.0;
  for (std::size_t i = 0; i < support.sigma.size(); ++i) {
    e += support.masses[i] * std::sqrt(m * sum_squares(support.sigma[i]));
  }
  return e / 8.0;
}

double two_arm_lower_bound_constant(const ContextSupport& support, std::size_t complexity) {
  support.validate();
  if (support.arms() != 2) throw std::invalid_argument("two-arm bound needs K = 2");
  const double m = require_complexity(complexity);
  double e = 0.0;
  for (std::size_t i = 0; i < support.sigma.size(); ++i) {
    const double s = support.sigma[i][0] + support.sigma[i][1];
    e += support.masses[i] * std::sqrt(m * s * s);
  }
  return e / 8.0;
}

double lower_bound_constant(const ContextSupport& support, std::size_t complexity) {
  support.validate();
  return support.arms() == 2 ? two_arm_lower_bound_constant(support, complexity)
                             : general_lower_bound_constant(support, complexity);
}

double context_free_lower_bound_constant(const ContextSupport& support,
                                         std::size_t complexity, const Matrix& means) {
  support.validate();
  const std::size_t k = support.arms();
  if (!means.empty() && means.size() != support.sigma.size()) {
    throw std::invalid_argument("context_free_lower_bound_constant: one mean row per point");
  }
  std::vector<double> pooled(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    double second = 0.0;
    double mean = 0.0;
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < support.sigma.size(); ++i) {
      const double p = support.masses[i];
      second += p * support.sigma[i][a] * support.sigma[i][a];
      if (!means.empty()) {
        mean += p * means[i][a];
        mean_sq += p * means[i][a] * means[i][a];
      }
    }
    pooled[a] = std::sqrt(second + std::max(0.0, mean_sq - mean * mean));
  }
  return lower_bound_constant(ContextSupport{{1.0}, {pooled}}, complexity);
}

BoundConstant upper_bound_constant(const ContextSupport& support, std::size_t complexity,
                                   std::size_t dim, double multiplier) {
  support.validate();
  const std::size_t k = support.arms();
  const auto kappa = entropy_integral_bound(k, complexity, dim, multiplier);
  const double factor = leading_factor(support, k == 2);
  BoundConstant out;
  out.multiplier = multiplier;
  out.parametric = kappa.parametric;
  if (kappa.parametric) {
    // kappa = C * sqrt(ln d * M)
    const double per_c = std::sqrt(std::log(static_cast<double>(dim)) *
                                   static_cast<double>(complexity));
    out.constant_term = 870.4 * factor;
    out.c_coefficient = 108.8 * per_c * factor;
  } else {
    out.constant_term = (108.8 * kappa.value + 870.4) * factor;
    out.c_coefficient = 0.0;
  }
  return out;
}

Allocation solve_allocation(std::span<const double> std_devs) {
  // target_ratio validates positivity and switches regime on K
  Allocation out{target_ratio(std_devs), 0.0};
  if (std_devs.size() == 2) {
    out.value = std_devs[0] + std_devs[1];
  } else {
    out.value = std::sqrt(sum_squares(std_devs));
  }
  return out;
}

double allocation_objective(std::span<const double> std_devs, std::span<const double> w) {
  if (std_devs.size() != w.size() || w.size() < 2) {
    throw std::invalid_argument("allocation_objective: size mismatch");
  }
  if (w.size() == 2) {
    return std::sqrt(std_devs[0] * std_devs[0] / w[0] + std_devs[1] * std_devs[1] / w[1]);
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a) {
    worst = std::max(worst, std_devs[a] * std_devs[a] / w[a]);
  }
  return std::sqrt(worst);
}

double gaussian_kl(double mean_p, double mean_q, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kl: sigma must be > 0");
  const double d = mean_p - mean_q;
  return d * d / (2.0 * sigma * sigma);
}

double expected_log_likelihood_ratio(double gap, double sigma, double w, std::size_t budget,
                                     std::size_t complexity) {
  if (!(sigma > 0.0)) throw std::invalid_argument("expected_log_likelihood_ratio: sigma");
  if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("expected_log_likelihood_ratio: w");
  const double m = require_complexity(complexity);
  return static_cast<double>(budget) / (2.0 * m) * gap * gap / (sigma * sigma / w);
}

BoundReport make_bound_report(const ContextSupport& support, std::size_t complexity,
                              std::size_t dim, double multiplier) {
  support.validate();
  BoundReport r;
  r.arms = support.arms();
  r.complexity = complexity;
  r.dim = dim;
  r.regime = r.arms == 2 ? "K=2" : "K>=3";
  r.general_lower_bound_constant = general_lower_bound_constant(support, complexity);
  if (r.arms == 2) r.two_arm_lower_bound_constant = two_arm_lower_bound_constant(support, complexity);
  r.lower_bound_constant = lower_bound_constant(support, complexity);
  r.kappa = entropy_integral_bound(r.arms, complexity, dim, multiplier).value;
  r.upper_bound = upper_bound_constant(support, complexity, dim, multiplier);
  r.masses = support.masses;
  for (const auto& s : support.sigma) r.optimal_allocation.push_back(solve_allocation(s));
  return r;
}

nlohmann::ordered_json bound_report_to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["K"] = r.arms;
  j["M"] = r.complexity;
  j["d"] = r.dim;
  j["regime"] = r.regime;
  j["lower_bound_constant"] = r.lower_bound_constant;
  j["general_lower_bound_constant"] = r.general_lower_bound_constant;
  if (r.arms == 2) j["two_arm_lower_bound_constant"] = r.two_arm_lower_bound_constant;
  nlohmann::ordered_json upper;
  upper["value"] = r.upper_bound.value();
  upper["parametric"] = r.upper_bound.parametric;
  upper["multiplier_C"] = r.upper_bound.multiplier;
  upper["constant_term"] = r.upper_bound.constant_term;
  upper["c_coefficient"] = r.upper_bound.c_coefficient;
  upper["kappa"] = r.kappa;
  j["upper_bound_constant"] = std::move(upper);
  nlohmann::ordered_json alloc = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.optimal_allocation.size(); ++i) {
    nlohmann::ordered_json cell;
    cell["mass"] = r.masses[i];
    cell["w"] = r.optimal_allocation[i].weights;
    cell["value"] = r.optimal_allocation[i].value;
    alloc.push_back(std::move(cell));
  }
  j["optimal_allocation"] = std::move(alloc);
  return j;
}

}  // namespace plas
