#include "tts/rng.hpp"

namespace tts {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t stream) {
  // Mix the key halves separately before combining so that nearby
  // (seed, stream) pairs land in unrelated regions of the counter space.
  return SplitMix64(mix(mix(seed) ^ (kGoldenGamma * (stream + 1))));
}

std::uint64_t SplitMix64::next() {
  state_ += kGoldenGamma;
  return mix(state_);
}

double SplitMix64::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

}  // namespace tts
