#include "plas/kernels.hpp"

#include <arm_neon.h>

#include <stdexcept>

namespace plas::kernels::neon {

void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out) {
  if (columns.size() != query.size()) {
    throw std::invalid_argument("squared_distances: dimension mismatch");
  }
  const std::size_t n = out.size();
  const std::size_t body = n - n % 2;
  double* dst = out.data();

  for (std::size_t i = 0; i < body; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const float64x2_t diff =
          vsubq_f64(vld1q_f64(columns[j] + i), vdupq_n_f64(query[j]));
      // vmulq + vaddq rather than vfmaq: keeps rounding identical to scalar.
      acc = vaddq_f64(acc, vmulq_f64(diff, diff));
    }
    vst1q_f64(dst + i, acc);
  }

  for (std::size_t i = body; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const double diff = columns[j][i] - query[j];
      acc += diff * diff;
    }
    dst[i] = acc;
  }
}

}  // namespace plas::kernels::neon
