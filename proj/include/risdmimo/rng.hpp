// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace risdmimo {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based seed split: the result depends only on the base seed and
/// the ordered tag list, never on how many draws happened elsewhere.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags.
enum class Stream : std::uint64_t {
  UePositions = 1,
  ActiveSet,
  RisPositions,
  LargeScaleApUe,
  LargeScaleApRis,
  LargeScaleRisUe,
  SmallScaleApUe,
  SmallScaleApRis,
  SmallScaleRisUe,
  PhaseOffsets,
  RandomRisPhases,
  Drop,
};

constexpr std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

using Rng = std::mt19937_64;

}  // namespace risdmimo
