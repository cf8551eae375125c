#pragma once

#include <cstdint>
#include <random>

namespace fbmlab {

/// Master seed of an experiment. Sample i draws from its own engine seeded
/// with substream_seed(master_seed, i), so results do not depend on how
/// samples are scheduled over workers.
struct RngSpec {
  std::uint64_t master_seed = 0;

  bool operator==(const RngSpec&) const = default;
};

/// SplitMix64 finalizer applied to the master seed and the sample index.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t sample_index);

using Engine = std::mt19937_64;

Engine make_engine(const RngSpec& spec, std::uint64_t sample_index);

}  // namespace fbmlab
