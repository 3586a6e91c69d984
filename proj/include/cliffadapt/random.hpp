// Copyright 2026 The cliffadapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cliffadapt {

using Rng = std::mt19937_64;

/** SplitMix64 finalizer; used to derive statistically independent seeds. */
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/**
 * Independent random streams split off one master seed.
 *
 * Each consumer (instance generation, SPSA, discrete optimizer, sampling,
 * operator selection) draws from its own lane, so enabling or disabling one
 * component never shifts the numbers another one sees.
 */
enum class SeedLane : std::uint64_t {
  Instance = 1,
  Spsa = 2,
  Discrete = 3,
  Sampling = 4,
  Selection = 5,
};

constexpr std::uint64_t lane_seed(std::uint64_t master, SeedLane lane,
                                  std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(master ^ (static_cast<std::uint64_t>(lane) *
                                         0xd1b54a32d192ed03ULL)) +
                    index);
}

inline Rng make_rng(std::uint64_t master, SeedLane lane,
                    std::uint64_t index = 0) {
  return Rng(lane_seed(master, lane, index));
}

/// Uniform double in [0, 1) with 53 random bits; stable across standard
/// library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection (bound > 0).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace cliffadapt
