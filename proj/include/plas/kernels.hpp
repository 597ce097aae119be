#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace plas::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// True when the variant was compiled in and the running CPU supports it.
bool isa_supported(Isa isa);

// Best supported variant, unless PLAS_SIMD=scalar|avx2|neon overrides it.
Isa detect_isa();

Isa active_isa();

// Pins dispatch to `isa`. Throws std::invalid_argument if unsupported.
void force_isa(Isa isa);

/// Squared Euclidean distances from `query` to n points stored column-major.
///
/// `columns[j]` points at n contiguous coordinates of dimension j, and
/// `out.size()` is n. Every variant accumulates dimension by dimension,
/// `out[i] += (columns[j][i] - query[j])^2` without fused multiply-add, so
/// all variants produce bit-identical results.
void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out);

namespace scalar {
void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out);
}

namespace avx2 {
void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out);
}

namespace neon {
void squared_distances(std::span<const double* const> columns,
                       std::span<const double> query, std::span<double> out);
}

}  // namespace plas::kernels
