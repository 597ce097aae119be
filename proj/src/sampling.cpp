#include "plas/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "plas/errors.hpp"
#include "plas/io.hpp"
#include "plas/kernels.hpp"

namespace plas {

// ---------------------------------------------------------------------------
// History

std::vector<const double*> ArmSamples::column_ptrs() const {
  std::vector<const double*> ptrs;
  ptrs.reserve(columns.size());
  for (const auto& col : columns) ptrs.push_back(col.data());
  return ptrs;
}

History::History(std::size_t arms, std::size_t dim) : arms_(arms), dim_(dim) {
  if (arms_ < 2) throw std::invalid_argument("History: need at least 2 arms");
  if (dim_ < 1) throw std::invalid_argument("History: context dimension must be >= 1");
  per_arm_.resize(arms_);
  for (auto& s : per_arm_) s.columns.resize(dim_);
}

void History::append(Record record) {
  if (record.t != records_.size() + 1) {
    throw std::invalid_argument("History: round " + std::to_string(record.t) +
                                " does not follow round " + std::to_string(records_.size()));
  }
  if (record.context.size() != dim_) throw std::invalid_argument("History: context dimension");
  if (record.arm >= arms_) throw std::invalid_argument("History: arm out of range");
  if (record.w.size() != arms_ || record.mu_hat.size() != arms_ ||
      record.sigma_hat.size() != arms_) {
    throw std::invalid_argument("History: per-arm vectors must have K entries");
  }
  const double total = std::accumulate(record.w.begin(), record.w.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("History: w must sum to 1");

  auto& s = per_arm_[record.arm];
  for (std::size_t j = 0; j < dim_; ++j) s.columns[j].push_back(record.context[j]);
  s.outcomes.push_back(record.outcome);
  s.rounds.push_back(record.t);
  records_.push_back(std::move(record));
}

std::vector<std::vector<double>> History::contexts() const {
  std::vector<std::vector<double>> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.context);
  return out;
}

void write_history_csv(const History& history, std::ostream& out) {
  const std::size_t d = history.dim();
  const std::size_t k = history.arms();
  out << "t";
  for (std::size_t j = 1; j <= d; ++j) out << ",x_" << j;
  out << ",arm,y,xi";
  for (const char* name : {"w", "mu", "sigma"}) {
    for (std::size_t a = 1; a <= k; ++a) out << ',' << name << '_' << a;
  }
  out << '\n';
  for (const auto& r : history.records()) {
    out << r.t;
    for (double x : r.context) out << ',' << format_double(x);
    out << ',' << r.arm + 1 << ',' << format_double(r.outcome) << ',' << format_double(r.xi);
    for (const auto* v : {&r.w, &r.mu_hat, &r.sigma_hat}) {
      for (double x : *v) out << ',' << format_double(x);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Estimators

MomentEstimate knn_moment_estimates(const History& history,
                                    std::span<const double> context, std::size_t arm,
                                    std::size_t k, double c_bar) {
  if (arm >= history.arms()) throw std::invalid_argument("knn: arm out of range");
  if (k == 0) throw std::invalid_argument("knn: k must be >= 1");
  if (context.size() != history.dim()) throw std::invalid_argument("knn: context dimension");
  const ArmSamples& samples = history.samples(arm);
  const std::size_t n = samples.size();
  if (n == 0) {
    throw EstimatorUnavailable("no observations for arm " + std::to_string(arm + 1));
  }
  k = std::min(k, n);

  double sum = 0.0;
  double sum_sq = 0.0;
  if (k == n) {
    for (double y : samples.outcomes) {
      sum += y;
      sum_sq += y * y;
    }
  } else {
    thread_local std::vector<double> dist;
    thread_local std::vector<std::pair<double, std::size_t>> order;
    thread_local std::vector<std::size_t> chosen;
    dist.resize(n);
    const auto cols = samples.column_ptrs();
    kernels::squared_distances(cols, context, dist);

    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = {dist[i], i};
    // (distance, index) order: equal distances prefer the earlier round
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end());
    chosen.resize(k);
    for (std::size_t i = 0; i < k; ++i) chosen[i] = order[i].second;
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) {
      const double y = samples.outcomes[i];
      sum += y;
      sum_sq += y * y;
    }
  }
  const auto kk = static_cast<double>(k);
  return {std::clamp(sum / kk, -c_bar, c_bar),
          std::clamp(sum_sq / kk, 0.0, c_bar * c_bar + c_bar)};
}

double variance_estimate(double mu_hat, double nu_hat, double c_bar) {
  if (!(c_bar > 1.0)) throw std::invalid_argument("variance_estimate: c_bar must be > 1");
  const double raw = nu_hat - mu_hat * mu_hat;
  return std::max(std::min(raw, c_bar), 1.0 / c_bar);
}

std::vector<double> target_ratio(std::span<const double> std_devs) {
  const std::size_t k = std_devs.size();
  if (k < 2) throw std::invalid_argument("target_ratio: need K >= 2");
  std::vector<double> w(k);
  for (std::size_t a = 0; a < k; ++a) {
    const double s = std_devs[a];
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("target_ratio: standard deviations must be positive");
    }
    w[a] = k == 2 ? s : s * s;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

std::size_t draw_arm(std::span<const double> w, double xi) {
  if (w.empty()) throw std::invalid_argument("draw_arm: empty ratio");
  if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("draw_arm: xi outside [0,1]");
  double total = 0.0;
  for (double p : w) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("draw_arm: negative or non-finite ratio");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("draw_arm: ratio must sum to 1");

  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < w.size(); ++a) {
    cum += w[a];
    if (w[a] > 0.0) last_positive = a;
    if (xi <= cum && w[a] > 0.0) return a;
  }
  // xi above a cumulative sum that rounded just below 1
  return last_positive;
}

std::size_t default_neighbor_count(std::size_t n_arm) {
  if (n_arm <= 1) return 1;
  if (n_arm > (std::size_t{1} << 32)) throw std::overflow_error("neighbor count: n too large");
  const auto n2 = static_cast<unsigned long long>(n_arm) * n_arm;
  auto k = static_cast<unsigned long long>(std::ceil(std::cbrt(static_cast<double>(n2))));
  auto cube = [](unsigned long long x) { return x * x * x; };
  while (k > 1 && cube(k - 1) >= n2) --k;
  while (cube(k) < n2) ++k;
  return static_cast<std::size_t>(k);
}

// ---------------------------------------------------------------------------
// Sampler

SamplerState::SamplerState(std::size_t arms, std::size_t dim, SamplerOptions options)
    : options_(std::move(options)), history_(arms, dim) {
  if (!(options_.c_bar > 1.0)) throw std::invalid_argument("SamplerState: c_bar must be > 1");
  if (!options_.neighbor_count) throw std::invalid_argument("SamplerState: missing k rule");
  if (options_.rule == AssignmentRule::known_variance && !options_.true_std) {
    throw std::invalid_argument("SamplerState: known_variance rule needs true_std");
  }
}

void SamplerState::commit(std::span<const double> context, const Assignment& assignment,
                          double outcome) {
  Record r;
  r.t = next_round();
  r.context.assign(context.begin(), context.end());
  r.arm = assignment.arm;
  r.outcome = outcome;
  r.xi = assignment.xi;
  r.w = assignment.w;
  r.mu_hat = assignment.mu_hat;
  r.sigma_hat = assignment.sigma_hat;
  history_.append(std::move(r));
}

Assignment as_step(const SamplerState& state, std::span<const double> context, Rng& rng) {
  const std::size_t k = state.arms();
  const std::size_t t = state.next_round();
  const auto& opt = state.options();
  Assignment out;
  out.mu_hat.assign(k, 0.0);
  out.sigma_hat.assign(k, 1.0);

  if (t <= k) {
    out.w.assign(k, 1.0 / static_cast<double>(k));
    out.xi = uniform01(rng);
    out.arm = t - 1;
    return out;
  }

  const History& history = state.history();
  for (std::size_t a = 0; a < k; ++a) {
    const std::size_t neighbors = opt.neighbor_count(history.samples(a).size());
    const auto m = knn_moment_estimates(history, context, a, neighbors, opt.c_bar);
    out.mu_hat[a] = m.mean;
    out.sigma_hat[a] = std::sqrt(variance_estimate(m.mean, m.second_moment, opt.c_bar));
  }
  switch (opt.rule) {
    case AssignmentRule::adaptive:
      out.w = target_ratio(out.sigma_hat);
      break;
    case AssignmentRule::uniform:
      out.w.assign(k, 1.0 / static_cast<double>(k));
      break;
    case AssignmentRule::known_variance:
      for (std::size_t a = 0; a < k; ++a) out.sigma_hat[a] = opt.true_std(a, context);
      out.w = target_ratio(out.sigma_hat);
      break;
  }
  out.xi = uniform01(rng);
  out.arm = draw_arm(out.w, out.xi);
  return out;
}

}  // namespace plas
