#include "fbmlab/rng.hpp"

namespace fbmlab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t sample_index) {
  return splitmix64(splitmix64(master_seed) ^ (sample_index * 0xd1b54a32d192ed03ULL));
}

Engine make_engine(const RngSpec& spec, std::uint64_t sample_index) {
  return Engine(substream_seed(spec.master_seed, sample_index));
}

}  // namespace fbmlab
