#include "qmon/noise.hpp"

#include <cmath>
#include <numbers>

namespace qmon {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// 53-bit uniform in (0, 1].
double unit_open_closed(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterNormal::CounterNormal(std::uint64_t seed, std::uint64_t trajectory)
    : seed_(seed), trajectory_(trajectory), key_(splitmix64(splitmix64(seed) ^ trajectory)) {}

double CounterNormal::operator()(std::uint64_t step, std::uint32_t substep, NoiseStream stream) const {
  const std::uint64_t lane =
      (static_cast<std::uint64_t>(substep) << 2) | static_cast<std::uint64_t>(stream);
  const std::uint64_t h = splitmix64(splitmix64(key_ ^ step) ^ lane);
  const double u1 = unit_open_closed(h);
  const double u2 = unit_open_closed(splitmix64(h ^ kGolden));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qmon
