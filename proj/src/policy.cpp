#include "plas/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace plas {

std::string_view to_string(PolicyKind kind) {
  return kind == PolicyKind::tabular ? "tabular" : "threshold";
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(PolicyKind kind, CellPartition partition, Matrix probs)
    : kind_(kind), partition_(std::move(partition)), probs_(std::move(probs)), arms_(0) {
  if (probs_.size() != partition_.cell_count()) {
    throw std::invalid_argument("Policy: need one probability row per cell");
  }
  arms_ = probs_.front().size();
  if (arms_ < 2) throw std::invalid_argument("Policy: need at least 2 arms");
  for (const auto& row : probs_) {
    if (row.size() != arms_) throw std::invalid_argument("Policy: ragged probability rows");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("Policy: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("Policy: probability row does not sum to 1");
    }
  }
  if (kind_ == PolicyKind::threshold) {
    if (partition_.splits().size() != 1 || partition_.splits().front().cuts.size() != 1) {
      throw std::invalid_argument("Policy: threshold policy needs exactly one cut");
    }
    if (!is_deterministic()) {
      throw std::invalid_argument("Policy: threshold policy must be deterministic");
    }
  }
}

Policy Policy::deterministic(PolicyKind kind, CellPartition partition,
                             std::span<const std::size_t> arms, std::size_t n_arms) {
  Matrix probs(arms.size(), std::vector<double>(n_arms, 0.0));
  for (std::size_t c = 0; c < arms.size(); ++c) {
    if (arms[c] >= n_arms) throw std::invalid_argument("Policy: arm out of range");
    probs[c][arms[c]] = 1.0;
  }
  return Policy(kind, std::move(partition), std::move(probs));
}

Policy Policy::uniform(CellPartition partition, std::size_t n_arms) {
  const std::size_t m = partition.cell_count();
  return Policy(PolicyKind::tabular, std::move(partition),
                Matrix(m, std::vector<double>(n_arms, 1.0 / static_cast<double>(n_arms))));
}

std::span<const double> Policy::cell_probabilities(std::size_t cell) const {
  return probs_.at(cell);
}

std::span<const double> Policy::probabilities(std::span<const double> context) const {
  return probs_[partition_.cell_of(context)];
}

std::optional<std::size_t> Policy::deterministic_arm(std::size_t cell) const {
  const auto& row = probs_.at(cell);
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (row[a] == 1.0) return a;
  }
  return std::nullopt;
}

bool Policy::is_deterministic() const {
  for (std::size_t c = 0; c < probs_.size(); ++c) {
    if (!deterministic_arm(c)) return false;
  }
  return true;
}

nlohmann::ordered_json policy_to_json(const Policy& policy) {
  nlohmann::ordered_json splits = nlohmann::ordered_json::array();
  for (const auto& split : policy.partition().splits()) {
    nlohmann::ordered_json s;
    s["dim"] = split.dim;
    s["cuts"] = split.cuts;
    splits.push_back(std::move(s));
  }
  nlohmann::ordered_json j;
  j["kind"] = to_string(policy.kind());
  j["cells"] = {{"splits", std::move(splits)}};
  j["probs"] = policy.probabilities();
  return j;
}

Policy policy_from_json(const nlohmann::ordered_json& j) {
  const auto kind_name = j.at("kind").get<std::string>();
  PolicyKind kind;
  if (kind_name == "tabular") {
    kind = PolicyKind::tabular;
  } else if (kind_name == "threshold") {
    kind = PolicyKind::threshold;
  } else {
    throw std::invalid_argument("policy JSON: unknown kind '" + kind_name + "'");
  }
  std::vector<CellPartition::Split> splits;
  for (const auto& s : j.at("cells").at("splits")) {
    splits.push_back({s.at("dim").get<std::size_t>(), s.at("cuts").get<std::vector<double>>()});
  }
  return Policy(kind, CellPartition(std::move(splits)), j.at("probs").get<Matrix>());
}

// ---------------------------------------------------------------------------
// PolicyClass

PolicyClass PolicyClass::tabular(CellPartition partition, std::size_t arms) {
  if (arms < 2) throw std::invalid_argument("PolicyClass: need at least 2 arms");
  PolicyClass cls;
  cls.family = PolicyFamily::tabular;
  cls.arms = arms;
  cls.partition = std::move(partition);
  return cls;
}

PolicyClass PolicyClass::threshold(std::size_t dim, std::vector<double> candidate_cuts,
                                   std::size_t arms) {
  if (arms < 2) throw std::invalid_argument("PolicyClass: need at least 2 arms");
  if (candidate_cuts.empty()) {
    throw std::invalid_argument("PolicyClass: threshold family needs candidate cuts");
  }
  std::sort(candidate_cuts.begin(), candidate_cuts.end());
  candidate_cuts.erase(std::unique(candidate_cuts.begin(), candidate_cuts.end()),
                       candidate_cuts.end());
  PolicyClass cls;
  cls.family = PolicyFamily::threshold;
  cls.arms = arms;
  cls.dim = dim;
  cls.candidate_cuts = std::move(candidate_cuts);
  return cls;
}

std::size_t PolicyClass::cell_count() const {
  return family == PolicyFamily::tabular ? partition.cell_count() : 2;
}

double PolicyClass::size() const {
  const auto k = static_cast<double>(arms);
  if (family == PolicyFamily::tabular) {
    return std::pow(k, static_cast<double>(partition.cell_count()));
  }
  return static_cast<double>(candidate_cuts.size()) * k * k;
}

std::vector<Policy> PolicyClass::enumerate() const {
  std::vector<Policy> out;
  if (family == PolicyFamily::tabular) {
    const std::size_t m = partition.cell_count();
    std::vector<std::size_t> assignment(m, 0);
    while (true) {
      out.push_back(Policy::deterministic(PolicyKind::tabular, partition, assignment, arms));
      std::size_t c = 0;
      while (c < m && ++assignment[c] == arms) assignment[c++] = 0;
      if (c == m) break;
    }
    return out;
  }
  for (double cut : candidate_cuts) {
    const CellPartition part({CellPartition::Split{dim, {cut}}});
    for (std::size_t right = 0; right < arms; ++right) {
      for (std::size_t left = 0; left < arms; ++left) {
        const std::size_t assignment[2] = {left, right};
        out.push_back(Policy::deterministic(PolicyKind::threshold, part, assignment, arms));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Values

namespace {

double expected_reward(std::span<const double> probs, std::span<const double> means) {
  double v = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) v += probs[a] * means[a];
  return v;
}

struct ValuePair {
  double optimal = 0.0;
  double policy = 0.0;
};

// Monte Carlo over shared contexts; `policy` may be null (optimal only).
ValuePair monte_carlo_values(const Policy* policy, const BanditModel& model,
                             const PolicyValueOptions& options) {
  if (options.n_mc == 0) throw std::invalid_argument("policy_value: n_mc must be >= 1");
  Rng rng = make_rng(options.seed, 0x706f6c6963ULL);
  std::vector<double> means(model.arms());
  ValuePair sum;
  for (std::size_t i = 0; i < options.n_mc; ++i) {
    const auto x = model.sample_context(rng);
    for (std::size_t a = 0; a < model.arms(); ++a) means[a] = model.conditional_mean(x, a);
    sum.optimal += *std::max_element(means.begin(), means.end());
    if (policy) sum.policy += expected_reward(policy->probabilities(x), means);
  }
  const auto n = static_cast<double>(options.n_mc);
  return {sum.optimal / n, sum.policy / n};
}

ValuePair exact_values(const Policy* policy, const BanditModel& model) {
  ValuePair out;
  std::vector<double> means(model.arms());
  if (const auto* f = std::get_if<FiniteContexts>(&model.contexts())) {
    for (std::size_t i = 0; i < f->points.size(); ++i) {
      const auto& x = f->points[i];
      for (std::size_t a = 0; a < model.arms(); ++a) means[a] = model.conditional_mean(x, a);
      out.optimal += f->masses[i] * *std::max_element(means.begin(), means.end());
      if (policy) out.policy += f->masses[i] * expected_reward(policy->probabilities(x), means);
    }
    return out;
  }
  const auto& cells = *model.cells();
  for (std::size_t c = 0; c < cells.masses.size(); ++c) {
    const auto& row = cells.means[c];
    out.optimal += cells.masses[c] * *std::max_element(row.begin(), row.end());
    if (policy) {
      // A one-cell policy is constant, so it is valued on any model partition.
      const std::size_t pc = policy->cell_count() == 1 ? 0 : c;
      out.policy += cells.masses[c] * expected_reward(policy->cell_probabilities(pc), row);
    }
  }
  return out;
}

bool model_has_exact_optimum(const BanditModel& model) {
  return std::holds_alternative<FiniteContexts>(model.contexts()) || model.cells().has_value();
}

ValuePair values(const Policy* policy, const BanditModel& model,
                 const PolicyValueOptions& options) {
  if (policy && policy->arms() != model.arms()) {
    throw std::invalid_argument("policy and model disagree on the number of arms");
  }
  const bool exact = policy ? has_exact_value(*policy, model) : model_has_exact_optimum(model);
  return exact ? exact_values(policy, model) : monte_carlo_values(policy, model, options);
}

}  // namespace

bool has_exact_value(const Policy& policy, const BanditModel& model) {
  if (std::holds_alternative<FiniteContexts>(model.contexts())) return true;
  if (!model.cells()) return false;
  return policy.cell_count() == 1 || model.cells()->partition == policy.partition();
}

double policy_value(const Policy& policy, const BanditModel& model,
                    const PolicyValueOptions& options) {
  return values(&policy, model, options).policy;
}

double optimal_value(const BanditModel& model, const PolicyValueOptions& options) {
  return values(nullptr, model, options).optimal;
}

double simple_regret(const Policy& policy, const BanditModel& model,
                     const PolicyValueOptions& options) {
  const auto v = values(&policy, model, options);
  return v.optimal - v.policy;
}

// ---------------------------------------------------------------------------
// Complexity

std::size_t shattering_dimension(const std::vector<std::vector<std::size_t>>& labelings,
                                 std::size_t n_points, std::size_t n_labels) {
  if (n_points > 20) throw std::invalid_argument("shattering_dimension: too many points");
  for (const auto& l : labelings) {
    if (l.size() != n_points) throw std::invalid_argument("shattering_dimension: ragged labelings");
  }
  const std::uint32_t full = (1u << n_points) - 1u;
  std::vector<std::size_t> idx;
  for (std::size_t s = n_points; s >= 1; --s) {
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != s) continue;
      idx.clear();
      for (std::size_t j = 0; j < n_points; ++j) {
        if (mask & (1u << j)) idx.push_back(j);
      }
      // Distinct projections of the class onto the subset.
      std::unordered_set<std::uint64_t> seen;
      std::vector<std::vector<std::size_t>> proj;
      for (const auto& l : labelings) {
        std::uint64_t code = 0;
        std::vector<std::size_t> p(s);
        for (std::size_t i = 0; i < s; ++i) {
          p[i] = l[idx[i]];
          code = code * n_labels + p[i];
        }
        if (seen.insert(code).second) proj.push_back(std::move(p));
      }
      if (proj.size() < (std::size_t{1} << s)) continue;
      // f_1 and f_-1 are themselves realized (all-plus / all-minus patterns),
      // so it suffices to search pairs of realized projections.
      for (std::size_t u = 0; u < proj.size(); ++u) {
        for (std::size_t v = 0; v < proj.size(); ++v) {
          const auto& f1 = proj[u];
          const auto& fm = proj[v];
          bool differ = true;
          for (std::size_t i = 0; i < s && differ; ++i) differ = f1[i] != fm[i];
          if (!differ) continue;
          bool all = true;
          for (std::uint32_t pattern = 0; pattern < (1u << s) && all; ++pattern) {
            std::uint64_t code = 0;
            for (std::size_t i = 0; i < s; ++i) {
              code = code * n_labels + ((pattern >> i) & 1u ? f1[i] : fm[i]);
            }
            all = seen.contains(code);
          }
          if (all) return s;
        }
      }
    }
  }
  return 0;
}

NatarajanResult natarajan_dimension(const PolicyClass& cls) {
  const std::size_t analytic =
      cls.family == PolicyFamily::tabular ? cls.partition.cell_count() : 2;

  std::vector<std::vector<double>> points;
  if (cls.family == PolicyFamily::tabular) {
    const std::size_t dim = std::max<std::size_t>(1, cls.partition.min_dim());
    for (std::size_t c = 0; c < cls.partition.cell_count(); ++c) {
      points.push_back(cls.partition.representative(c, dim));
    }
  } else {
    // One point in every interval between consecutive candidate cuts.
    const CellPartition grid({CellPartition::Split{cls.dim, cls.candidate_cuts}});
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      points.push_back(grid.representative(c, cls.dim + 1));
    }
  }
  if (points.size() > 12 || cls.size() > static_cast<double>(1u << 20)) {
    return {analytic, false};
  }

  std::vector<std::vector<std::size_t>> labelings;
  for (const auto& policy : cls.enumerate()) {
    std::vector<std::size_t> labels;
    for (const auto& x : points) {
      labels.push_back(*policy.deterministic_arm(policy.partition().cell_of(x)));
    }
    labelings.push_back(std::move(labels));
  }
  return {shattering_dimension(labelings, points.size(), cls.arms), true};
}

ComplexityBound entropy_integral_bound(std::size_t arms, std::size_t complexity,
                                       std::size_t dim, double multiplier) {
  if (arms < 2) throw std::invalid_argument("entropy_integral_bound: K must be >= 2");
  if (complexity < 1) throw std::invalid_argument("entropy_integral_bound: M must be >= 1");
  const auto m = static_cast<double>(complexity);
  if (arms == 2) return {2.5 * std::sqrt(m), 1.0, false};
  if (dim < 1) throw std::invalid_argument("entropy_integral_bound: d must be >= 1");
  return {multiplier * std::sqrt(std::log(static_cast<double>(dim)) * m), multiplier, true};
}

}  // namespace plas
