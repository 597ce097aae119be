#include "plas/kernels.hpp"

#include <immintrin.h>

#include <stdexcept>

namespace plas::kernels::avx2 {

void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out) {
  if (columns.size() != query.size()) {
    throw std::invalid_argument("squared_distances: dimension mismatch");
  }
  const std::size_t n = out.size();
  const std::size_t body = n - n % 4;
  double* dst = out.data();

  // Processes one block of four points across all dimensions while the
  // accumulator stays in a register.
  for (std::size_t i = 0; i < body; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const __m256d x = _mm256_loadu_pd(columns[j] + i);
      const __m256d diff = _mm256_sub_pd(x, _mm256_set1_pd(query[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(dst + i, acc);
  }

  // tail
  for (std::size_t i = body; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const double diff = columns[j][i] - query[j];
      acc += diff * diff;
    }
    dst[i] = acc;
  }
}

}  // namespace plas::kernels::avx2
