// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef REGPERTURB_SEED_HPP_
#define REGPERTURB_SEED_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace regperturb {

// Counter-based seed derivation. A stream is named by a master seed plus a
// tuple of integer keys, e.g. (seed, retry) or
// (master, purpose, b_index, q_index, trial). Any single stream can be
// replayed without generating the ones before it.
inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t master,
                                std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = SplitMix64(master);
  for (std::uint64_t key : keys) {
    h = SplitMix64(h ^ SplitMix64(key + 0x632be59bd9b4e019ULL));
  }
  return h;
}

using Rng = std::mt19937_64;

inline Rng MakeStream(std::uint64_t master,
                      std::initializer_list<std::uint64_t> keys) {
  return Rng(DeriveSeed(master, keys));
}

// Stream purposes used by the calibration sweep.
enum class StreamPurpose : std::uint64_t {
  kSubsample = 1,
  kNoise = 2,
};

}  // namespace regperturb

#endif  // REGPERTURB_SEED_HPP_
