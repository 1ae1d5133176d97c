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

// On-disk formats. All numbers are written as shortest round-trip decimals
// (std::to_chars), independent of the process locale.
//
// Dataset CSV: '#'-prefixed metadata lines, a column header, then one row
// per stored meta-pulse:
//
//   # qndnoise-dataset v1
//   # version=<tool version>
//   # seed=<u64>
//   # config_hash=<16 hex digits>
//   # <section.key>=<value>        (one per canonical simulation setting)
//   repetition,cycle,n_atoms_true,n_atoms_imaging,fz_true,fz_effective,dispersive_phi,partition,meta_index,n_photons,s_y
//
// Variance table CSV (fit input for externally measured data):
//
//   # qndnoise-variance-table v1
//   n_atoms,n_photons,variance,m_samples

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qndnoise/estimator.hpp"
#include "qndnoise/sim.hpp"

namespace qnd {

inline constexpr std::string_view kDatasetMagic = "# qndnoise-dataset v1";
inline constexpr std::string_view kDatasetColumns =
    "repetition,cycle,n_atoms_true,n_atoms_imaging,fz_true,fz_effective,"
    "dispersive_phi,partition,meta_index,n_photons,s_y";
inline constexpr std::string_view kVarianceTableMagic =
    "# qndnoise-variance-table v1";
inline constexpr std::string_view kVarianceTableColumns =
    "n_atoms,n_photons,variance,m_samples";
inline constexpr int kFitSchemaVersion = 1;

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(std::string_view text);

std::string serialize_variance_table(const std::vector<VariancePoint>& points);
std::vector<VariancePoint> parse_variance_table(std::string_view text);

// Reads a whole file; throws Error(kIo).
std::string read_file(const std::string& path);
// Writes to "<path>.tmp" and renames over path; throws Error(kIo).
void write_file_atomic(const std::string& path, std::string_view content);

struct FitProvenance {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  int dropped_bins = 0;
};

nlohmann::json fit_to_json(const FitResult& fit,
                           const std::vector<VariancePoint>& points,
                           const FitProvenance& provenance,
                           const std::optional<DispersiveCalibration>& dispersive,
                           const std::optional<ConsistencyReport>& consistency);

// Parameters stored in a results file; throws Error(kConfig) when the
// document does not follow the fit schema.
NoiseParams params_from_fit_json(const nlohmann::json& doc);

}  // namespace qnd
