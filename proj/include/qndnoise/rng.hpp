// Copyright 2026 The qndnoise Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random streams.
//
// Every random draw of a simulation comes from a stream addressed by
// (master seed, repetition, cycle, channel). The master seed is mixed with
// SplitMix64 into a 64-bit Philox key; the 128-bit Philox counter holds
// (block, channel, cycle, repetition). Streams never overlap and do not
// depend on the order in which they are consumed, so results are identical
// for any thread count.

#include <array>
#include <cstdint>
#include <limits>

namespace qnd {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., Random123).
Philox4x32Counter philox4x32_10(Philox4x32Counter counter, Philox4x32Key key);

// SplitMix64 finalizer, used to derive Philox keys from user seeds.
std::uint64_t splitmix64(std::uint64_t x);

enum class Channel : std::uint32_t {
  kLoading = 1,
  kLoss = 2,
  kThermal = 3,
  kAtomicTechnical = 4,
  kLightTechnical = 5,
  kShot = 6,
  kElectronic = 7,
  kDispersive = 8,
  kImaging = 9,
  kTest = 0xFFFF,
};

struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t repetition = 0;
  std::uint32_t cycle = 0;
  Channel channel = Channel::kTest;
};

// UniformRandomBitGenerator over one stream.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  explicit CounterRng(const StreamId& id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in the open interval (0, 1), 53-bit resolution.
  double uniform01();

  // Standard normal deviate.
  double normal();

 private:
  Philox4x32Key key_;
  Philox4x32Counter counter_;
  Philox4x32Counter buffer_{};
  int used_ = 4;
};

}  // namespace qnd
