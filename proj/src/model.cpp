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

#include "qndnoise/model.hpp"

#include <cmath>
#include <string>

#include "qndnoise/error.hpp"

namespace qnd {

NoiseParams::NoiseParams(double g, double v_e, double alpha, double beta,
                         double f)
    : g_(g), v_e_(v_e), alpha_(alpha), beta_(beta), f_(f),
      v1_(per_atom_variance(f)) {
  if (!(std::isfinite(g) && g > 0.0)) throw_invalid("G must be > 0");
  if (!(std::isfinite(v_e) && v_e >= 0.0)) throw_invalid("V_E must be >= 0");
  if (!(std::isfinite(alpha) && alpha >= 0.0))
    throw_invalid("alpha must be >= 0");
  if (!(std::isfinite(beta) && beta >= 0.0)) throw_invalid("beta must be >= 0");
  if (!(std::isfinite(f) && f >= 0.5)) throw_invalid("F must be >= 1/2");
}

NoiseParams NoiseParams::reference_defaults() {
  return NoiseParams(6.65e-8, 4.9e5, 4.3e-11, 3.1e-7, 1.0);
}

void OperatingPoint::validate() const {
  if (!(std::isfinite(n_atoms) && n_atoms >= 0.0))
    throw_invalid("n_atoms must be >= 0");
  if (!(std::isfinite(n_photons) && n_photons >= 0.0))
    throw_invalid("n_photons must be >= 0");
}

std::string_view to_string(NoiseTerm term) {
  switch (term) {
    case NoiseTerm::kElectronic:
      return "electronic";
    case NoiseTerm::kLightShot:
      return "light_shot";
    case NoiseTerm::kLightTechnical:
      return "light_technical";
    case NoiseTerm::kAtomicProjection:
      return "atomic_projection";
    case NoiseTerm::kAtomicTechnical:
      return "atomic_technical";
  }
  return "unknown";
}

double NoiseBudget::term(NoiseTerm t) const {
  switch (t) {
    case NoiseTerm::kElectronic:
      return electronic;
    case NoiseTerm::kLightShot:
      return light_shot;
    case NoiseTerm::kLightTechnical:
      return light_technical;
    case NoiseTerm::kAtomicProjection:
      return atomic_projection;
    case NoiseTerm::kAtomicTechnical:
      return atomic_technical;
  }
  return 0.0;
}

std::optional<double> NoiseBudget::db_below_projection(NoiseTerm t) const {
  if (t == NoiseTerm::kAtomicProjection) return std::nullopt;
  const double value = term(t);
  if (value == 0.0 || atomic_projection == 0.0) return std::nullopt;
  return to_db(atomic_projection / value);
}

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

NoiseBudget noise_budget(const NoiseParams& params,
                         const OperatingPoint& point) {
  point.validate();
  const double nl = point.n_photons;
  const double na = point.n_atoms;
  const double atomic_gain = params.g() * params.g() * params.v1() * nl * nl / 4.0;

  NoiseBudget b;
  b.electronic = params.v_e();
  b.light_shot = nl / 4.0;
  b.light_technical = params.alpha() * nl * nl;
  b.atomic_projection = atomic_gain * na;
  b.atomic_technical = params.beta() * atomic_gain * na * na;
  b.total = b.electronic + b.light_shot + b.light_technical +
            b.atomic_projection + b.atomic_technical;
  return b;
}

double variance_model(const NoiseParams& params, const OperatingPoint& point) {
  return noise_budget(params, point).total;
}

double thermal_variance(double n_atoms, double f) {
  if (!(n_atoms >= 0.0)) throw_invalid("n_atoms must be >= 0");
  if (!(f >= 0.5)) throw_invalid("F must be >= 1/2");
  return n_atoms * per_atom_variance(f);
}

double estimate_fz(double s_y_out, double n_photons, double g) {
  if (!(n_photons > 0.0)) throw_invalid("n_photons must be > 0");
  if (!(g > 0.0)) throw_invalid("G must be > 0");
  return 2.0 * s_y_out / (g * n_photons);
}

double readout_noise_spins(const NoiseParams& params, double n_photons) {
  if (!(n_photons > 0.0)) throw_invalid("n_photons must be > 0");
  const double nl = n_photons;
  const double light = params.v_e() + nl / 4.0 + params.alpha() * nl * nl;
  const double gain = params.g() * params.g() * nl * nl / 4.0;
  return std::sqrt(light / gain);
}

Crossovers crossover_points(const NoiseParams& params) {
  Crossovers c;
  if (params.beta() > 0.0) c.atoms = 1.0 / params.beta();
  if (params.alpha() > 0.0) c.photons = 1.0 / (4.0 * params.alpha());
  return c;
}

}  // namespace qnd
