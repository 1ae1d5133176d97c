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

namespace qnd {

// One row of a variance table: the sample variance of S_y over m_samples
// independent repetitions at a given atom-number bin and photon number.
struct VariancePoint {
  double n_atoms = 0.0;
  double n_photons = 0.0;
  double variance = 0.0;
  std::int64_t m_samples = 0;
};

}  // namespace qnd
