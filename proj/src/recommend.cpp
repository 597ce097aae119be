#include "plas/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "plas/errors.hpp"
#include "plas/io.hpp"
#include "plas/log.hpp"

namespace plas {

double clip_outcome(double y, double clip_level) {
  if (!(clip_level > 0.0)) throw std::invalid_argument("clip_outcome: level must be > 0");
  return std::max(std::min(y, clip_level), -clip_level);
}

double clip_level_for(std::size_t budget, double alpha) {
  if (budget == 0) throw std::invalid_argument("clip_level_for: budget must be >= 1");
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("clip_level_for: alpha must lie in (0, 1/2)");
  }
  return std::pow(static_cast<double>(budget), alpha);
}

std::vector<double> aipw_score(const Record& record, double clip_level) {
  const std::size_t k = record.mu_hat.size();
  if (record.w.size() != k || record.arm >= k) {
    throw InvalidRecord("aipw_score: malformed record");
  }
  const double w = record.w[record.arm];
  if (!(w > 0.0)) {
    throw InvalidRecord("aipw_score: zero assignment probability in round " +
                        std::to_string(record.t));
  }
  std::vector<double> gamma(record.mu_hat);
  const double residual = clip_outcome(record.outcome, clip_level) - record.mu_hat[record.arm];
  gamma[record.arm] += residual / w;
  return gamma;
}

AipwScoreTable::AipwScoreTable(std::size_t arms, double clip_level, double alpha)
    : arms_(arms), clip_level_(clip_level), alpha_(alpha) {
  if (arms_ < 2) throw std::invalid_argument("AipwScoreTable: need K >= 2");
}

AipwScoreTable AipwScoreTable::from_history(const History& history, double alpha) {
  AipwScoreTable table(history.arms(), clip_level_for(history.size(), alpha), alpha);
  table.values_.reserve(history.size() * history.arms());
  for (const auto& r : history.records()) table.push_row(aipw_score(r, table.clip_level_));
  return table;
}

void AipwScoreTable::push_row(std::span<const double> row) {
  if (row.size() != arms_) throw std::invalid_argument("AipwScoreTable: row width");
  for (double v : row) {
    if (!std::isfinite(v)) throw std::invalid_argument("AipwScoreTable: non-finite score");
  }
  values_.insert(values_.end(), row.begin(), row.end());
}

std::span<const double> AipwScoreTable::row(std::size_t t) const {
  if (t >= rows()) throw std::out_of_range("AipwScoreTable: row out of range");
  return std::span<const double>(values_).subspan(t * arms_, arms_);
}

AipwScoreTable AipwScoreTable::scaled(double factor) const {
  AipwScoreTable out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

void write_scores_csv(const AipwScoreTable& scores, std::ostream& out) {
  out << "t";
  for (std::size_t a = 1; a <= scores.arms(); ++a) out << ",gamma_" << a;
  out << '\n';
  for (std::size_t t = 0; t < scores.rows(); ++t) {
    out << t + 1;
    for (double v : scores.row(t)) out << ',' << format_double(v);
    out << '\n';
  }
}

namespace {

void check_alignment(const AipwScoreTable& scores,
                     std::span<const std::vector<double>> contexts) {
  if (scores.rows() != contexts.size()) {
    throw std::invalid_argument("score table has " + std::to_string(scores.rows()) +
                                " rows but " + std::to_string(contexts.size()) + " contexts");
  }
}

// Column sums of the score table per cell of `partition`.
Matrix cell_column_sums(const AipwScoreTable& scores,
                        std::span<const std::vector<double>> contexts,
                        const CellPartition& partition, std::vector<std::size_t>& counts) {
  Matrix sums(partition.cell_count(), std::vector<double>(scores.arms(), 0.0));
  counts.assign(partition.cell_count(), 0);
  for (std::size_t t = 0; t < contexts.size(); ++t) {
    const std::size_t c = partition.cell_of(contexts[t]);
    ++counts[c];
    const auto row = scores.row(t);
    for (std::size_t a = 0; a < row.size(); ++a) sums[c][a] += row[a];
  }
  return sums;
}

std::size_t lowest_argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double empirical_policy_value(const AipwScoreTable& scores,
                              std::span<const std::vector<double>> contexts,
                              const Policy& policy) {
  check_alignment(scores, contexts);
  if (policy.arms() != scores.arms()) {
    throw std::invalid_argument("empirical_policy_value: arm count mismatch");
  }
  if (contexts.empty()) throw std::invalid_argument("empirical_policy_value: empty table");
  double total = 0.0;
  for (std::size_t t = 0; t < contexts.size(); ++t) {
    const auto probs = policy.probabilities(contexts[t]);
    const auto row = scores.row(t);
    for (std::size_t a = 0; a < row.size(); ++a) total += probs[a] * row[a];
  }
  return total / static_cast<double>(contexts.size());
}

Policy train_policy(const AipwScoreTable& scores,
                    std::span<const std::vector<double>> contexts, const PolicyClass& cls) {
  check_alignment(scores, contexts);
  if (cls.arms != scores.arms()) throw std::invalid_argument("train_policy: arm count mismatch");
  std::vector<std::size_t> counts;

  if (cls.family == PolicyFamily::tabular) {
    const auto sums = cell_column_sums(scores, contexts, cls.partition, counts);
    std::vector<std::size_t> arms(sums.size(), 0);
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] == 0) {
        warn("train_policy: cell " + std::to_string(c) + " has no observations; assigning arm 1");
        continue;
      }
      arms[c] = lowest_argmax(sums[c]);
    }
    return Policy::deterministic(PolicyKind::tabular, cls.partition, arms, cls.arms);
  }

  double best_total = 0.0;
  std::optional<Policy> best;
  for (double cut : cls.candidate_cuts) {
    const CellPartition part({CellPartition::Split{cls.dim, {cut}}});
    const auto sums = cell_column_sums(scores, contexts, part, counts);
    std::size_t arms[2] = {0, 0};
    double total = 0.0;
    for (std::size_t side = 0; side < 2; ++side) {
      if (counts[side] == 0) continue;
      arms[side] = lowest_argmax(sums[side]);
      total += sums[side][arms[side]];
    }
    if (!best || total > best_total) {
      best_total = total;
      best = Policy::deterministic(PolicyKind::threshold, part, arms, cls.arms);
    }
  }
  return *best;
}

std::size_t recommend_arm(const Policy& policy, std::span<const double> context, Rng& rng) {
  const std::size_t cell = policy.partition().cell_of(context);
  if (const auto arm = policy.deterministic_arm(cell)) return *arm;
  return draw_arm(policy.cell_probabilities(cell), uniform01(rng));
}

}  // namespace plas
