#pragma once

// AIPW scores, empirical policy values, policy training and recommendation.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "plas/policy.hpp"
#include "plas/rng.hpp"
#include "plas/sampling.hpp"

namespace plas {

// thre(y, U, -U)
double clip_outcome(double y, double clip_level);

// U_T = T^alpha
double clip_level_for(std::size_t budget, double alpha);

/// Gamma^a = 1[A = a] (c(Y) - mu_hat^a) / w(a) + mu_hat^a for every arm, using
/// the mu_hat and w frozen in the record.
/// Throws InvalidRecord if w(A) is not positive.
std::vector<double> aipw_score(const Record& record, double clip_level);

/// T x K table of AIPW scores.
class AipwScoreTable {
 public:
  AipwScoreTable(std::size_t arms, double clip_level, double alpha);

  // Scores every record of `history` with U_T = T^alpha, T = history.size().
  static AipwScoreTable from_history(const History& history, double alpha);

  void push_row(std::span<const double> row);

  std::size_t rows() const { return arms_ == 0 ? 0 : values_.size() / arms_; }
  std::size_t arms() const { return arms_; }
  double clip_level() const { return clip_level_; }
  double alpha() const { return alpha_; }
  std::span<const double> row(std::size_t t) const;

  // Multiplies every entry by `factor`.
  AipwScoreTable scaled(double factor) const;

 private:
  std::size_t arms_;
  double clip_level_;
  double alpha_;
  std::vector<double> values_;  // row-major
};

// Columns: t, gamma_1..gamma_K
void write_scores_csv(const AipwScoreTable& scores, std::ostream& out);

// (1/T) sum_t sum_a pi(a|X_t) Gamma^a_t
double empirical_policy_value(const AipwScoreTable& scores,
                              std::span<const std::vector<double>> contexts,
                              const Policy& policy);

/// argmax over the class of the empirical policy value.
///
/// Tabular: per-cell argmax of column sums, lowest arm on ties; a cell with no
/// contexts gets arm 0 and a warning. Threshold: the same per side of every
/// candidate cut, keeping the first cut that attains the maximum.
Policy train_policy(const AipwScoreTable& scores,
                    std::span<const std::vector<double>> contexts,
                    const PolicyClass& cls);

// Samples an arm from pi(.|x); a deterministic row returns its arm without
// consuming randomness.
std::size_t recommend_arm(const Policy& policy, std::span<const double> context, Rng& rng);

}  // namespace plas
