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

// Run configuration: flat "key = value" text grouped under [section]
// headers. '#' and ';' start comments. Every section is optional and falls
// back to the reference defaults below.
//
//   [run]    mode
//   [io]     input, output, fit_result, format (text|csv|json)
//   [params] G, V_E, alpha, beta, F
//   [point]  n_atoms, n_photons
//   [sim]    initial_atoms, loading_rms, loss_per_cycle, cycles_per_load,
//            repetitions, pulses_per_train, photons_per_pulse,
//            meta_pulse_sizes (comma list), meta_pulses_per_partition,
//            dispersive_photons, imaging_rms, seed, exact_sampling_threshold
//   [noise]  shot, electronic, light_technical, atomic_technical, projection
//            (on|off)
//   [fit]    cycles_per_bin, fit_shot_term, max_iterations, tolerance
//   [report] fixed_photons, fixed_atoms

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qndnoise/estimator.hpp"
#include "qndnoise/model.hpp"
#include "qndnoise/sim.hpp"

namespace qnd {

// Shortest round-trip decimal, locale independent.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

enum class OutputFormat { kText, kCsv, kJson };

struct ParamsBlock {
  double g = 6.65e-8;
  double v_e = 4.9e5;
  double alpha = 4.3e-11;
  double beta = 3.1e-7;
  double f = 1.0;
};

class RunConfig {
 public:
  std::string mode;
  std::string input;
  std::string output;
  std::string fit_result;
  OutputFormat format = OutputFormat::kText;

  ParamsBlock params_block;
  OperatingPoint point{7.6e5, 1e9};
  SimConfig sim;  // sim.truth is rebuilt from params_block by finalize()
  NaBinning binning;
  FitOptions fit;
  double report_fixed_photons = 1e9;
  double report_fixed_atoms = 7.6e5;

  // Parses and finalizes; throws Error(kConfig) with "source:line: ..."
  static RunConfig parse(std::string_view text,
                         std::string_view source = "config");
  static RunConfig load(const std::string& path);

  // Applies one "section.key" override (e.g. from the command line) and
  // re-validates.
  void set(std::string_view dotted_key, std::string_view value);
  // Applies several overrides, validating once at the end.
  void set_many(const std::vector<std::pair<std::string, std::string>>& entries);

  NoiseParams params() const;

  // Rebuilds derived state and validates; throws Error(kConfig).
  void finalize();

 private:
  void apply(std::string_view section, std::string_view key,
             std::string_view value);
  void apply_overrides(
      const std::vector<std::pair<std::string, std::string>>& entries);
  std::string where(std::string_view dotted_key) const;

  std::string source_ = "config";
  std::map<std::string, int, std::less<>> lines_;
};

// Canonical "section.key" -> value list describing a simulation; used for
// dataset provenance headers and the config hash.
std::vector<std::pair<std::string, std::string>> canonical_sim_entries(
    const SimConfig& config);

// Inverse of canonical_sim_entries.
SimConfig sim_config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries);

// FNV-1a 64-bit over the canonical entries, as 16 hex digits.
std::string config_hash(const SimConfig& config);

}  // namespace qnd
