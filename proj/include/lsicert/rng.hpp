#pragma once

#include <cstdint>
#include <random>

namespace lsicert {

// Every random stream in the project is an mt19937_64 seeded through
// splitmix64 from (base seed, stream index). Bump the version when the
// derivation changes; it is written into run manifests.
inline constexpr const char* kGeneratorName = "mt19937_64/splitmix64-streams";
inline constexpr int kGeneratorVersion = 1;

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent substream; deterministic in (base, stream).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream = 0) {
  return Rng(derive_seed(base, stream));
}

}  // namespace lsicert
