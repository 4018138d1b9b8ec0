#include <random>

#include "spdesign/core.hpp"

namespace spd {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (a bijection on 64-bit words).
constexpr std::uint64_t finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngConfig RngConfig::derive(std::uint64_t tag) const {
  return {seed, finalize(finalize(stream + kGolden) ^ (tag * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL))};
}

Rng::Rng(const RngConfig& cfg) : key_(finalize(finalize(cfg.seed) ^ finalize(cfg.stream * kGolden + 1))) {}

Rng::result_type Rng::draw(std::uint64_t counter) const { return finalize(key_ + (counter + 1) * kGolden); }

double Rng::normal() {
  std::normal_distribution<double> dist;
  return dist(*this);
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace spd
