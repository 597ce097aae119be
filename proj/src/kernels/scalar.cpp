#include "plas/kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace plas::kernels::scalar {

void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out) {
  if (columns.size() != query.size()) {
    throw std::invalid_argument("squared_distances: dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = out.size();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const double* col = columns[j];
    const double q = query[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = col[i] - q;
      out[i] += diff * diff;
    }
  }
}

}  // namespace plas::kernels::scalar
