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

// Seeded Monte Carlo simulation of the thermal-state noise calibration
// campaign: load, then per cycle lose atoms, prepare the completely mixed
// state, probe with a pulse train, sum pulses into meta-pulses, and run the
// dispersive atom-number and imaging measurements.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qndnoise/model.hpp"
#include "qndnoise/rng.hpp"
#include "qndnoise/variance_point.hpp"

namespace qnd {

inline constexpr const char* kVersionTag = "qndnoise 1.0.0";

// Individual noise sources can be switched off for isolation studies.
struct NoiseToggles {
  bool shot = true;
  bool electronic = true;
  bool light_technical = true;
  bool atomic_technical = true;
  bool projection = true;

  bool operator==(const NoiseToggles&) const = default;
};

struct SimConfig {
  NoiseParams truth = NoiseParams::reference_defaults();
  double initial_atoms = 8e5;   // mean loaded atom number
  double loading_rms = 0.02;    // relative shot-to-shot loading fluctuation
  double loss_per_cycle = 0.15;
  int cycles_per_load = 20;
  int repetitions = 500;
  int pulses_per_train = 40;
  double photons_per_pulse = 2.5e7;
  // Each entry s partitions the train into floor(pulses/s) meta-pulses of s
  // consecutive pulses; at most meta_pulses_per_partition are kept.
  std::vector<int> meta_pulse_sizes = {1, 2, 4, 10, 20, 40};
  int meta_pulses_per_partition = 2;
  double dispersive_photons = 1e9;
  double imaging_rms = 0.02;
  std::uint64_t seed = 7;
  std::int64_t exact_sampling_threshold = 10000;
  NoiseToggles noise;

  // Throws Error(kInvalidArgument) naming the offending field.
  void validate() const;
};

struct PulseSignal {
  double n_photons = 0.0;
  double s_y = 0.0;
};

struct MetaPulse {
  int partition = 0;  // pulses per meta-pulse
  int index = 0;      // position within the partition
  double n_photons = 0.0;
  double s_y = 0.0;
};

struct TrialRecord {
  std::uint32_t repetition = 0;
  std::uint32_t cycle = 0;
  std::int64_t n_atoms_true = 0;
  std::int64_t n_atoms_imaging = 0;
  double fz_true = 0.0;       // projection-noise sample of the mixed state
  double fz_effective = 0.0;  // plus atomic technical noise
  double dispersive_phi = 0.0;
  std::vector<MetaPulse> meta_pulses;
};

struct Dataset {
  SimConfig config;
  std::string version = kVersionTag;
  std::vector<TrialRecord> records;
};

// Sum of n_atoms independent uniform m in {-f..f} when n_atoms is at most
// exact_threshold; otherwise a Gaussian of matching variance rounded onto
// the lattice -n f + Z that the exact sum lives on.
double sample_thermal_fz(std::int64_t n_atoms, double f, CounterRng& rng,
                         std::int64_t exact_threshold = 10000);

// Adds the per-preparation atomic technical fluctuation of variance
// beta N_A^2 V1.
double apply_atomic_technical_noise(double fz, double n_atoms,
                                    const NoiseParams& params,
                                    CounterRng& rng);

// S_y of one pulse: G N_L F_z / 2 + shot noise + imbalance eps N_L / 2.
double simulate_pulse(double fz_effective, double n_photons,
                      double epsilon_imbalance, const NoiseParams& params,
                      CounterRng& rng, bool shot_noise = true);

// Contiguous sums of pulses, one electronic noise sample of variance
// electronic_variance per output. sizes must not exceed the pulses given.
std::vector<PulseSignal> aggregate_meta_pulses(
    std::span<const PulseSignal> pulses, std::span<const int> sizes,
    double electronic_variance, CounterRng& rng);

struct DispersiveResult {
  double phi = 0.0;
  double n_atoms = 0.0;
};

// Macroscopic rotation of a fully polarized sample, <F_z> = N_A.
DispersiveResult simulate_dispersive_na(std::int64_t n_atoms,
                                        double n_photons,
                                        const NoiseParams& params,
                                        CounterRng& rng,
                                        const NoiseToggles& noise = {});

// Multiplicative Gaussian error, rounded to a count and floored at zero.
double simulate_absorption_imaging(double n_atoms, double imaging_rms,
                                   CounterRng& rng);

// Number of survivors when each atom is kept with probability keep.
std::int64_t binomial_thin(std::int64_t n, double keep, CounterRng& rng);

// threads == 0 picks the hardware concurrency.
Dataset run_sequence(const SimConfig& config, unsigned threads = 1);

struct NaBinning {
  int cycles_per_bin = 1;
};

struct VarianceTable {
  std::vector<VariancePoint> points;
  int dropped_bins = 0;  // bins with fewer than two samples
};

// Groups meta-pulse index 0 of every partition by (cycle bin, photon
// number) and takes the unbiased sample variance over repetitions. n_atoms
// of each point is the mean imaged atom number of the bin.
VarianceTable tabulate_variances(const Dataset& dataset,
                                 const NaBinning& binning = {});

}  // namespace qnd
