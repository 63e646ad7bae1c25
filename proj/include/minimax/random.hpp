#pragma once

#include <cstdint>
#include <random>

namespace minimax {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for replicate `index` of a stream seeded with `seed`:
/// mix(seed, i) = splitmix64(splitmix64(seed) ^ (i + 0x9e3779b97f4a7c15)).
/// Independent of the order in which replicates are generated.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded stream of standard normal / uniform draws. Deterministic per seed on
/// a given standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace minimax
