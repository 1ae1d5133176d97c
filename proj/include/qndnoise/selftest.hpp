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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qnd {

struct SelftestOptions {
  std::uint64_t seed = 1;
  // Fault injection: evaluate the budget checks with this per-atom variance
  // instead of the F = 1 value.
  std::optional<double> inject_v1;
};

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool pass() const;
  std::string text() const;
};

// Fast subset of the acceptance criteria (budget, sensitivity, crossovers,
// noiseless fit, thermal sampler, single-source isolation, determinism).
SelftestReport run_selftest(const SelftestOptions& options = {});

}  // namespace qnd
