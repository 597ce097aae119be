#pragma once

#include <cstdint>
#include <random>

namespace plas {

using Rng = std::mt19937_64;

// Independent stream `stream` derived from a user seed.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

double uniform01(Rng& rng);

}  // namespace plas
