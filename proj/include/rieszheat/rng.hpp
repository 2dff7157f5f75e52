#ifndef RIESZHEAT_RNG_HPP
#define RIESZHEAT_RNG_HPP

// Reproducible random streams.
//
// Splitting function (frozen; pinned by tests/unit/test_rng.cpp):
//   mix(z)            = splitmix64 finalizer of z + 0x9E3779B97F4A7C15
//   stream_key(s, i)  = mix(mix(s) ^ (i * 0xD1B54A32D192ED03))
// The key seeds a std::mt19937_64; Gaussians come from boost's ziggurat
// normal_distribution, whose output sequence is fixed by the engine output.

#include <cstdint>
#include <random>
#include <string>

#include <boost/random/normal_distribution.hpp>

namespace rieszheat {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t index)
      : engine_(stream_key(master_seed, index)),
        lineage_(std::to_string(master_seed) + "/" + std::to_string(index)) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  /// "<master seed>/<stream index>", recorded in NoiseSlice::seed_path.
  const std::string& lineage() const { return lineage_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  std::string lineage_;
};

}  // namespace rieszheat

#endif  // RIESZHEAT_RNG_HPP
