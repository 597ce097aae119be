#include "plas/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plas {

// ---------------------------------------------------------------------------
// CellPartition

CellPartition::CellPartition(std::vector<Split> splits) : splits_(std::move(splits)) {
  cell_count_ = 1;
  for (std::size_t s = 0; s < splits_.size(); ++s) {
    auto& cuts = splits_[s].cuts;
    if (cuts.empty()) throw std::invalid_argument("CellPartition: split without cuts");
    if (!std::is_sorted(cuts.begin(), cuts.end()) ||
        std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) {
      throw std::invalid_argument("CellPartition: cuts must be strictly increasing");
    }
    for (std::size_t r = 0; r < s; ++r) {
      if (splits_[r].dim == splits_[s].dim) {
        throw std::invalid_argument("CellPartition: dimension split twice");
      }
    }
    cell_count_ *= cuts.size() + 1;
  }
}

CellPartition CellPartition::single() { return CellPartition{}; }

CellPartition CellPartition::quadrants(double threshold) {
  return CellPartition({Split{0, {threshold}}, Split{1, {threshold}}});
}

std::size_t CellPartition::cell_of(std::span<const double> context) const {
  std::size_t cell = 0;
  std::size_t stride = 1;
  for (const auto& split : splits_) {
    if (split.dim >= context.size()) {
      throw std::invalid_argument("CellPartition: context has too few dimensions");
    }
    // number of cuts strictly below x: x == cut lands in the lower bin
    const auto bin = static_cast<std::size_t>(
        std::lower_bound(split.cuts.begin(), split.cuts.end(), context[split.dim]) -
        split.cuts.begin());
    cell += bin * stride;
    stride *= split.cuts.size() + 1;
  }
  return cell;
}

std::size_t CellPartition::min_dim() const {
  std::size_t d = 0;
  for (const auto& split : splits_) d = std::max(d, split.dim + 1);
  return d;
}

std::vector<double> CellPartition::representative(std::size_t cell,
                                                  std::size_t dim) const {
  if (cell >= cell_count_) throw std::invalid_argument("representative: cell out of range");
  std::vector<double> x(std::max(dim, min_dim()), 0.0);
  for (const auto& split : splits_) {
    const std::size_t bins = split.cuts.size() + 1;
    const std::size_t bin = cell % bins;
    cell /= bins;
    const auto& c = split.cuts;
    if (bin == 0) {
      x[split.dim] = c.front() - 1.0;
    } else if (bin == c.size()) {
      x[split.dim] = c.back() + 1.0;
    } else {
      x[split.dim] = 0.5 * (c[bin - 1] + c[bin]);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// BanditModel

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

std::size_t context_dim(const ContextDistribution& contexts) {
  if (const auto* g = std::get_if<GaussianContexts>(&contexts)) {
    if (g->means.size() != g->variances.size()) {
      throw std::invalid_argument("GaussianContexts: means/variances size mismatch");
    }
    for (double v : g->variances) {
      if (!(v >= 0.0)) throw std::invalid_argument("GaussianContexts: negative variance");
    }
    return g->means.size();
  }
  const auto& f = std::get<FiniteContexts>(contexts);
  if (f.points.empty() || f.points.size() != f.masses.size()) {
    throw std::invalid_argument("FiniteContexts: need one mass per support point");
  }
  double total = 0.0;
  for (double m : f.masses) {
    if (!(m >= 0.0)) throw std::invalid_argument("FiniteContexts: negative mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("FiniteContexts: masses must sum to 1");
  }
  const std::size_t d = f.points.front().size();
  for (const auto& p : f.points) {
    if (p.size() != d) throw std::invalid_argument("FiniteContexts: ragged support points");
  }
  return d;
}

// P(lower < X_dim <= upper) under the Gaussian context distribution.
double gaussian_bin_mass(const GaussianContexts& g, std::size_t dim, double lower,
                         double upper) {
  const double m = g.means[dim];
  const double sd = std::sqrt(g.variances[dim]);
  auto cdf = [&](double x) {
    if (std::isinf(x)) return x < 0 ? 0.0 : 1.0;
    if (sd == 0.0) return m <= x ? 1.0 : 0.0;
    return normal_cdf((x - m) / sd);
  };
  return cdf(upper) - cdf(lower);
}

std::vector<double> cell_masses(const CellPartition& partition,
                                const ContextDistribution& contexts) {
  std::vector<double> masses(partition.cell_count(), 0.0);
  if (const auto* f = std::get_if<FiniteContexts>(&contexts)) {
    for (std::size_t i = 0; i < f->points.size(); ++i) {
      masses[partition.cell_of(f->points[i])] += f->masses[i];
    }
    return masses;
  }
  const auto& g = std::get<GaussianContexts>(contexts);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t cell = 0; cell < masses.size(); ++cell) {
    double mass = 1.0;
    std::size_t rest = cell;
    for (const auto& split : partition.splits()) {
      const std::size_t bins = split.cuts.size() + 1;
      const std::size_t bin = rest % bins;
      rest /= bins;
      const double lo = bin == 0 ? -inf : split.cuts[bin - 1];
      const double hi = bin == split.cuts.size() ? inf : split.cuts[bin];
      mass *= gaussian_bin_mass(g, split.dim, lo, hi);
    }
    masses[cell] = mass;
  }
  return masses;
}

}  // namespace

BanditModel::BanditModel(std::size_t arms, std::size_t dim, ArmFunction mean,
                         ArmFunction std_dev, ContextDistribution contexts)
    : arms_(arms),
      dim_(dim),
      mean_(std::move(mean)),
      std_(std::move(std_dev)),
      contexts_(std::move(contexts)) {
  if (arms_ < 2) throw std::invalid_argument("BanditModel: need at least 2 arms");
  if (dim_ < 1) throw std::invalid_argument("BanditModel: context dimension must be >= 1");
  if (!mean_ || !std_) throw std::invalid_argument("BanditModel: missing mean/std function");
  if (context_dim(contexts_) != dim_) {
    throw std::invalid_argument("BanditModel: context distribution dimension mismatch");
  }
}

BanditModel BanditModel::piecewise(CellStructure cells, ContextDistribution contexts) {
  const std::size_t m = cells.partition.cell_count();
  if (cells.means.size() != m || cells.stds.size() != m) {
    throw std::invalid_argument("piecewise: need one mean/std row per cell");
  }
  const std::size_t arms = cells.means.front().size();
  for (std::size_t c = 0; c < m; ++c) {
    if (cells.means[c].size() != arms || cells.stds[c].size() != arms) {
      throw std::invalid_argument("piecewise: ragged mean/std rows");
    }
  }
  const std::size_t dim = context_dim(contexts);
  if (cells.partition.min_dim() > dim) {
    throw std::invalid_argument("piecewise: partition references a missing dimension");
  }
  cells.masses = cell_masses(cells.partition, contexts);

  auto shared = std::make_shared<const CellStructure>(cells);
  ArmFunction mean = [shared](std::size_t arm, std::span<const double> x) {
    return shared->means[shared->partition.cell_of(x)][arm];
  };
  ArmFunction sd = [shared](std::size_t arm, std::span<const double> x) {
    return shared->stds[shared->partition.cell_of(x)][arm];
  };
  BanditModel model(arms, dim, std::move(mean), std::move(sd), std::move(contexts));
  model.cells_ = std::move(cells);
  return model;
}

void BanditModel::check_arm(std::size_t arm) const {
  if (arm >= arms_) {
    throw std::invalid_argument("arm index " + std::to_string(arm) +
                                " out of range for K=" + std::to_string(arms_));
  }
}

std::vector<double> BanditModel::sample_context(Rng& rng) const {
  if (const auto* g = std::get_if<GaussianContexts>(&contexts_)) {
    std::vector<double> x(dim_);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      x[i] = g->means[i] + std::sqrt(g->variances[i]) * normal(rng);
    }
    return x;
  }
  const auto& f = std::get<FiniteContexts>(contexts_);
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    cum += f.masses[i];
    if (u < cum) return f.points[i];
  }
  return f.points.back();
}

double BanditModel::conditional_mean(std::span<const double> context,
                                     std::size_t arm) const {
  check_arm(arm);
  const double mu = mean_(arm, context);
  if (!std::isfinite(mu)) throw std::domain_error("conditional mean is not finite");
  return mu;
}

double BanditModel::conditional_std(std::span<const double> context,
                                    std::size_t arm) const {
  check_arm(arm);
  const double sd = std_(arm, context);
  if (!(sd >= 0.0) || !std::isfinite(sd)) {
    throw std::domain_error("conditional standard deviation must be finite and >= 0");
  }
  return sd;
}

double BanditModel::potential_outcome(std::span<const double> context, std::size_t arm,
                                      Rng& rng) const {
  const double mu = conditional_mean(context, arm);
  const double sd = conditional_std(context, arm);
  if (sd == 0.0) return mu;
  return std::normal_distribution<double>(mu, sd)(rng);
}

std::size_t BanditModel::best_arm(std::span<const double> context) const {
  std::size_t best = 0;
  double best_mean = conditional_mean(context, 0);
  for (std::size_t a = 1; a < arms_; ++a) {
    const double mu = conditional_mean(context, a);
    if (mu > best_mean) {
      best = a;
      best_mean = mu;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Quadrant scenario

Matrix constant_sigma(std::size_t cells, std::size_t arms, double value) {
  return Matrix(cells, std::vector<double>(arms, value));
}

Matrix per_arm_sigma(std::size_t cells, std::span<const double> per_arm) {
  return Matrix(cells, std::vector<double>(per_arm.begin(), per_arm.end()));
}

Matrix heteroskedastic_sigma(std::size_t cells, std::size_t arms) {
  std::vector<double> row(arms);
  for (std::size_t a = 0; a < arms; ++a) row[a] = 0.5 * static_cast<double>(a + 1);
  return per_arm_sigma(cells, row);
}

std::vector<std::size_t> quadrant_best_arms(const QuadrantSpec& spec) {
  // cells: 0 = (low, low), 1 = (high, low), 2 = (low, high), 3 = (high, high)
  return {3, spec.fix_quadrant_typo ? std::size_t{2} : std::size_t{1}, 1, 0};
}

BanditModel make_quadrant_model(const QuadrantSpec& spec,
                                std::vector<double> context_means) {
  if (spec.arms < 4) throw std::invalid_argument("quadrant scenario needs K >= 4");
  if (spec.dim < 2) throw std::invalid_argument("quadrant scenario needs d >= 2");
  if (context_means.size() != spec.dim) {
    throw std::invalid_argument("quadrant scenario: one context mean per dimension");
  }
  CellStructure cells;
  cells.partition = CellPartition::quadrants(spec.threshold);
  const std::size_t m = cells.partition.cell_count();
  cells.means = Matrix(m, std::vector<double>(spec.arms, spec.base_value));
  const auto best = quadrant_best_arms(spec);
  for (std::size_t c = 0; c < m; ++c) cells.means[c][best[c]] = spec.best_value;

  cells.stds = spec.sigma.empty() ? constant_sigma(m, spec.arms, 1.0) : spec.sigma;
  if (cells.stds.size() != m) {
    throw std::invalid_argument("quadrant scenario: sigma needs one row per cell");
  }
  for (const auto& row : cells.stds) {
    if (row.size() != spec.arms) {
      throw std::invalid_argument("quadrant scenario: sigma row needs one entry per arm");
    }
    for (double s : row) {
      if (!(s > 0.0)) throw std::invalid_argument("quadrant scenario: sigma must be > 0");
    }
  }
  GaussianContexts contexts{std::move(context_means),
                            std::vector<double>(spec.dim, spec.context_variance)};
  return BanditModel::piecewise(std::move(cells), std::move(contexts));
}

BanditModel draw_quadrant_model(const QuadrantSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> mean_dist(-spec.context_mean_range,
                                                   spec.context_mean_range);
  std::vector<double> means(spec.dim);
  for (auto& m : means) m = mean_dist(rng);
  return make_quadrant_model(spec, std::move(means));
}

}  // namespace plas
