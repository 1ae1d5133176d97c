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

// Implementations behind the CLI subcommands. Each returns the text meant
// for standard output and throws qnd::Error on failure.

#include <optional>
#include <string>
#include <vector>

#include "qndnoise/config.hpp"
#include "qndnoise/estimator.hpp"
#include "qndnoise/sim.hpp"

namespace qnd {

// Rows of the photon-scan and atom-scan CSV files written by `report`.
inline constexpr std::string_view kReportColumns =
    "n_atoms,n_photons,m_samples,var_measured,var_stderr,var_model,"
    "var_projection_only,var_light_only";

std::vector<RotationSample> rotation_samples(const Dataset& dataset);

struct DatasetAnalysis {
  VarianceTable table;
  FitResult fit;
  std::optional<DispersiveCalibration> dispersive;
  std::optional<ConsistencyReport> consistency;
};

// Tabulate, fit, and cross-check against the dispersive calibration.
DatasetAnalysis analyze_dataset(const Dataset& dataset, const NaBinning& binning,
                                const FitOptions& options);

std::string cmd_simulate(const RunConfig& config, const std::string& out_path,
                         unsigned threads);
std::string cmd_fit(const RunConfig& config, const std::string& in_path,
                    const std::string& out_path);
std::string cmd_budget(const RunConfig& config, OutputFormat format,
                       const std::string& out_path);
std::string cmd_report(const RunConfig& config, const std::string& in_path,
                       const std::string& fit_path, const std::string& out_prefix);

}  // namespace qnd
