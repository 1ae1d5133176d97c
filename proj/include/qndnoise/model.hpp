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

// Analytic noise model of a Faraday-rotation QND spin measurement.
//
// The polarimeter signal S_y is expressed in photon-count units, so the
// optical shot noise of a pulse with N_L photons is exactly N_L/4. The
// measured variance at an operating point (N_A atoms, N_L photons) is the sum
//
//   V_E                          electronic noise floor
//   + N_L/4                      light shot noise
//   + alpha N_L^2                light technical noise
//   + G^2 V1 N_L^2/4 N_A         atomic projection noise
//   + beta G^2 V1 N_L^2/4 N_A^2  atomic technical noise
//
// with V1 = F(F+1)/3 the per-atom variance of the completely mixed state.

#include <array>
#include <optional>
#include <string_view>

namespace qnd {

// Per-atom variance of any spin component in the completely mixed state.
constexpr double per_atom_variance(double f) { return f * (f + 1.0) / 3.0; }

class NoiseParams {
 public:
  // Validates the invariants; throws Error(kInvalidArgument) on violation.
  NoiseParams(double g, double v_e, double alpha, double beta, double f = 1.0);

  // Fitted values from the thermal-state noise scan at F = 1.
  static NoiseParams reference_defaults();

  double g() const { return g_; }
  double v_e() const { return v_e_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double f() const { return f_; }
  double v1() const { return v1_; }

 private:
  double g_;
  double v_e_;
  double alpha_;
  double beta_;
  double f_;
  double v1_;
};

struct OperatingPoint {
  double n_atoms = 0.0;
  double n_photons = 0.0;

  void validate() const;
};

enum class NoiseTerm {
  kElectronic,
  kLightShot,
  kLightTechnical,
  kAtomicProjection,
  kAtomicTechnical,
};

inline constexpr std::array<NoiseTerm, 5> kAllTerms = {
    NoiseTerm::kElectronic, NoiseTerm::kLightShot, NoiseTerm::kLightTechnical,
    NoiseTerm::kAtomicProjection, NoiseTerm::kAtomicTechnical};

std::string_view to_string(NoiseTerm term);

struct NoiseBudget {
  double electronic = 0.0;
  double light_shot = 0.0;
  double light_technical = 0.0;
  double atomic_projection = 0.0;
  double atomic_technical = 0.0;
  double total = 0.0;

  double term(NoiseTerm t) const;

  // 10 log10(projection / term); empty when either variance is zero.
  // Querying the projection term itself always yields empty.
  std::optional<double> db_below_projection(NoiseTerm t) const;
};

double variance_model(const NoiseParams& params, const OperatingPoint& point);

NoiseBudget noise_budget(const NoiseParams& params,
                         const OperatingPoint& point);

// Variance of F_z for n_atoms spins in the completely mixed state.
double thermal_variance(double n_atoms, double f);

// Inverts the mean rotation S_y = G N_L F_z / 2.
double estimate_fz(double s_y_out, double n_photons, double g);

// Light-side noise referred to the spin, as a standard deviation in spins.
double readout_noise_spins(const NoiseParams& params, double n_photons);

// Atom and photon numbers where each technical term reaches its quantum
// counterpart. An empty optional means that crossover is unbounded.
struct Crossovers {
  std::optional<double> atoms;
  std::optional<double> photons;
};

Crossovers crossover_points(const NoiseParams& params);

double to_db(double ratio);

}  // namespace qnd
