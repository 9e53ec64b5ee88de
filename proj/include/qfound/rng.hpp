#pragma once

#include <cstdint>
#include <random>

namespace qfound {

using Rng = std::mt19937_64;

/// Independent stream number `stream` of the master seed. Streams are derived
/// by counter so that every sub-computation of a run is reproducible on its own.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace qfound
