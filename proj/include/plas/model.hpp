#pragma once

// Bandit environments: location-shift Gaussian models over a context space.
//
// Arms are 0-based throughout the C++ API.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "plas/rng.hpp"

namespace plas {

using Matrix = std::vector<std::vector<double>>;

/// Axis-aligned grid partition of the context space.
///
/// Each split bins one dimension by its sorted cut points; a coordinate equal
/// to a cut falls in the lower bin. Cells are numbered mixed-radix with the
/// first split varying fastest. A partition with no splits has one cell.
class CellPartition {
 public:
  struct Split {
    std::size_t dim = 0;
    std::vector<double> cuts;
    bool operator==(const Split&) const = default;
  };

  CellPartition() = default;
  explicit CellPartition(std::vector<Split> splits);

  static CellPartition single();
  // Cuts dimensions 0 and 1 at `threshold`: cell 0 = (low, low),
  // 1 = (high, low), 2 = (low, high), 3 = (high, high).
  static CellPartition quadrants(double threshold);

  std::size_t cell_count() const { return cell_count_; }
  std::size_t cell_of(std::span<const double> context) const;
  const std::vector<Split>& splits() const { return splits_; }

  // Largest context dimension referenced plus one (0 for no splits).
  std::size_t min_dim() const;

  // A point strictly inside `cell`, with unreferenced dimensions set to 0.
  std::vector<double> representative(std::size_t cell, std::size_t dim) const;

  bool operator==(const CellPartition&) const = default;

 private:
  std::vector<Split> splits_;
  std::size_t cell_count_ = 1;
};

struct GaussianContexts {
  std::vector<double> means;
  std::vector<double> variances;
};

struct FiniteContexts {
  std::vector<std::vector<double>> points;
  std::vector<double> masses;
};

using ContextDistribution = std::variant<GaussianContexts, FiniteContexts>;

using ArmFunction =
    std::function<double(std::size_t arm, std::span<const double> context)>;

/// Conditional moments that are constant on the cells of a partition.
struct CellStructure {
  CellPartition partition;
  std::vector<double> masses;  // P(X in cell), filled in by BanditModel
  Matrix means;                // [cell][arm]
  Matrix stds;                 // [cell][arm]
};

/// Location-shift Gaussian bandit model.
///
/// Immutable after construction; safe to share between threads.
class BanditModel {
 public:
  BanditModel(std::size_t arms, std::size_t dim, ArmFunction mean,
              ArmFunction std_dev, ContextDistribution contexts);

  // Model whose means and standard deviations are constant on each cell.
  // Cell masses are computed from `contexts`; Gaussian contexts require the
  // splits to reference distinct dimensions.
  static BanditModel piecewise(CellStructure cells, ContextDistribution contexts);

  std::size_t arms() const { return arms_; }
  std::size_t dim() const { return dim_; }
  const ContextDistribution& contexts() const { return contexts_; }
  const std::optional<CellStructure>& cells() const { return cells_; }

  std::vector<double> sample_context(Rng& rng) const;

  // Throws std::invalid_argument for arm >= arms().
  double conditional_mean(std::span<const double> context, std::size_t arm) const;
  double conditional_std(std::span<const double> context, std::size_t arm) const;

  // Draws Y^arm | X = context ~ N(mean, std^2). A zero standard deviation
  // (test doubles only) returns the mean exactly.
  double potential_outcome(std::span<const double> context, std::size_t arm,
                           Rng& rng) const;

  // Lowest-index maximizer of the conditional mean.
  std::size_t best_arm(std::span<const double> context) const;

 private:
  void check_arm(std::size_t arm) const;

  std::size_t arms_;
  std::size_t dim_;
  ArmFunction mean_;
  ArmFunction std_;
  ContextDistribution contexts_;
  std::optional<CellStructure> cells_;
};

double normal_cdf(double z);

/// Four-quadrant simulation design with K arms.
///
/// Context dimension i is N(m_i, v_i) with m_i drawn on [-range, range].
/// The best arm (value best_value) is arm 0 on (high, high), arm 1 on
/// (low, high), arm 1 on (high, low) and arm 3 on (low, low); all other arms
/// take base_value. `fix_quadrant_typo` moves the (high, low) best arm to 2.
struct QuadrantSpec {
  std::size_t arms = 4;
  std::size_t dim = 2;
  double best_value = 5.00;
  double base_value = 4.50;
  double threshold = 0.5;
  double context_variance = 1.0;
  double context_mean_range = 1.0;
  bool fix_quadrant_typo = false;
  Matrix sigma;  // [cell][arm]; empty means 1 everywhere
};

Matrix constant_sigma(std::size_t cells, std::size_t arms, double value);
Matrix per_arm_sigma(std::size_t cells, std::span<const double> per_arm);
// (0.5, 1.0, 1.5, ...) per arm, identical across cells.
Matrix heteroskedastic_sigma(std::size_t cells, std::size_t arms);

// Best arm of each quadrant cell under `spec`.
std::vector<std::size_t> quadrant_best_arms(const QuadrantSpec& spec);

BanditModel make_quadrant_model(const QuadrantSpec& spec,
                                std::vector<double> context_means);

// Draws the per-dimension context means, then builds the model.
BanditModel draw_quadrant_model(const QuadrantSpec& spec, Rng& rng);

}  // namespace plas
