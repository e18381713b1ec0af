#pragma once

#include <cstdint>

namespace qmon {

/// Independent Gaussian streams carried by one trajectory.
enum class NoiseStream : std::uint32_t {
  kWiener = 0,    ///< dW, shared by state and homodyne current
  kAnalyzer = 1,  ///< dZ, spectrum-analyzer noise on the output only
};

/// Counter-based standard normal generator.
///
/// Every draw is a pure function of (seed, trajectory, step, substep,
/// stream), so trajectories can be generated in any order or concurrently
/// and still reproduce bit-for-bit. Uniforms come from a SplitMix64 hash
/// chain over the key; normals from the Box-Muller cosine branch.
class CounterNormal {
 public:
  CounterNormal(std::uint64_t seed, std::uint64_t trajectory);

  double operator()(std::uint64_t step, std::uint32_t substep, NoiseStream stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t trajectory() const { return trajectory_; }

 private:
  std::uint64_t seed_;
  std::uint64_t trajectory_;
  std::uint64_t key_;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qmon
