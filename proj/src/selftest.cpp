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

#include "qndnoise/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "qndnoise/error.hpp"
#include "qndnoise/estimator.hpp"
#include "qndnoise/formats.hpp"
#include "qndnoise/model.hpp"
#include "qndnoise/sim.hpp"

namespace qnd {
namespace {

std::string num(double v, const char* fmt = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

bool within(double value, double target, double tol) {
  return std::abs(value - target) <= tol;
}

// Spin quantum number whose completely mixed state has per-atom variance v1.
double spin_for_v1(double v1) { return 0.5 * (-1.0 + std::sqrt(1.0 + 12.0 * v1)); }

NoiseParams selftest_params(const SelftestOptions& o) {
  const double f = o.inject_v1 ? spin_for_v1(*o.inject_v1) : 1.0;
  return NoiseParams(6.65e-8, 4.9e5, 4.3e-11, 3.1e-7, f);
}

SelftestCheck check_budget(const SelftestOptions& o) {
  const auto b = noise_budget(selftest_params(o), {7.6e5, 1e9});
  const double shot = *b.db_below_projection(NoiseTerm::kLightShot);
  const double atomic = *b.db_below_projection(NoiseTerm::kAtomicTechnical);
  const double light = *b.db_below_projection(NoiseTerm::kLightTechnical);
  const double elec = *b.db_below_projection(NoiseTerm::kElectronic);
  const bool ok = within(shot, 3.5, 0.2) && within(atomic, 6.3, 0.2) &&
                  within(light, 11.2, 0.3) && within(elec, 30.0, 1.0);
  return {"budget-db", ok,
          "shot " + num(shot, "%.2f") + ", atomic tech " + num(atomic, "%.2f") +
              ", light tech " + num(light, "%.2f") + ", electronic " +
              num(elec, "%.2f") + " dB"};
}

SelftestCheck check_sensitivity(const SelftestOptions& o) {
  const NoiseParams p = selftest_params(o);
  const double readout = readout_noise_spins(p, 1e9);
  const double projection = std::sqrt(thermal_variance(7.6e5, p.f()));
  const double margin = to_db(projection * projection / (readout * readout));
  const bool ok = readout >= 490.0 && readout <= 540.0 &&
                  within(projection, 712.0, 1.0) && within(margin, 2.8, 0.1);
  return {"sensitivity", ok,
          "readout " + num(readout, "%.1f") + " spins, projection " +
              num(projection, "%.1f") + " spins, margin " + num(margin, "%.2f") +
              " dB"};
}

SelftestCheck check_crossovers() {
  const auto c = crossover_points(NoiseParams::reference_defaults());
  const bool ok = c.atoms && c.photons && within(*c.atoms / 3.2e6, 1.0, 0.02) &&
                  within(*c.photons / 5.8e9, 1.0, 0.02);
  return {"crossovers", ok,
          "atoms " + num(c.atoms.value_or(NAN)) + ", photons " +
              num(c.photons.value_or(NAN))};
}

SelftestCheck check_noiseless_fit() {
  const NoiseParams truth = NoiseParams::reference_defaults();
  std::vector<VariancePoint> grid;
  for (double na : {4e4, 1e5, 2.5e5, 5e5, 8e5})
    for (double nl : {2.5e7, 1e8, 4e8, 1e9})
      grid.push_back({na, nl, variance_model(truth, {na, nl}), 500});
  const FitResult fit = fit_noise_surface(grid);
  const double a = truth.g() * truth.g() * truth.v1() / 4.0;
  const double expected[4] = {truth.v_e(), truth.alpha(), a, truth.beta() * a};
  double worst = 0.0;
  for (int j = 0; j < 4; ++j)
    worst = std::max(worst, std::abs(fit.coefficients(j) / expected[j] - 1.0));
  return {"fit-noiseless", worst < 1e-8, "max relative error " + num(worst)};
}

SelftestCheck check_thermal(std::uint64_t seed) {
  constexpr int kDraws = 300000;
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 4; ++n) {
    CounterRng rng(StreamId{seed, static_cast<std::uint32_t>(n), 0, Channel::kTest});
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double x = sample_thermal_fz(n, 1.0, rng);
      const double d = x - mean;
      mean += d / (i + 1);
      m2 += d * (x - mean);
    }
    const double var = m2 / (kDraws - 1);
    const double expected = 2.0 * n / 3.0;
    const double sigma = expected * std::sqrt(2.0 / (kDraws - 1));
    const double z = (var - expected) / sigma;
    ok = ok && std::abs(z) < 3.0;
    detail += (n > 1 ? ", " : "") + std::string("N=") + std::to_string(n) +
              " z=" + num(z, "%.2f");
  }
  return {"thermal-sampler", ok, detail};
}

SelftestCheck check_isolation(std::uint64_t seed) {
  const NoiseParams p = NoiseParams::reference_defaults();
  constexpr double kAtoms = 8e5;
  constexpr double kPhotons = 1e9;
  constexpr int kReps = 500;
  const double gain = p.g() * p.g() * p.v1() * kPhotons * kPhotons / 4.0;
  struct Source {
    const char* name;
    NoiseToggles toggles;
    double expected;
  };
  const NoiseToggles off{false, false, false, false, false};
  auto only = [&](auto member) {
    NoiseToggles t = off;
    t.*member = true;
    return t;
  };
  const Source sources[] = {
      {"shot", only(&NoiseToggles::shot), kPhotons / 4.0},
      {"electronic", only(&NoiseToggles::electronic), p.v_e()},
      {"light_technical", only(&NoiseToggles::light_technical),
       p.alpha() * kPhotons * kPhotons},
      {"atomic_technical", only(&NoiseToggles::atomic_technical),
       p.beta() * gain * kAtoms * kAtoms},
      {"projection", only(&NoiseToggles::projection), gain * kAtoms},
  };
  const double tol = 4.0 * std::sqrt(2.0 / (kReps - 1));
  bool ok = true;
  std::string detail;
  for (const auto& s : sources) {
    SimConfig c;
    c.initial_atoms = kAtoms;
    c.loading_rms = 0.0;
    c.cycles_per_load = 1;
    c.repetitions = kReps;
    c.meta_pulse_sizes = {40};
    c.meta_pulses_per_partition = 1;
    c.seed = seed;
    c.noise = s.toggles;
    const auto table = tabulate_variances(run_sequence(c));
    const double rel = table.points.at(0).variance / s.expected - 1.0;
    ok = ok && std::abs(rel) <= tol;
    detail += std::string(detail.empty() ? "" : ", ") + s.name + " " +
              num(100.0 * rel, "%+.1f") + "%";
  }
  return {"noise-isolation", ok, detail + " (tol " + num(100.0 * tol, "%.1f") + "%)"};
}

SelftestCheck check_determinism(std::uint64_t seed) {
  SimConfig c;
  c.repetitions = 8;
  c.cycles_per_load = 4;
  c.seed = seed;
  const std::string one = serialize_dataset(run_sequence(c, 1));
  const std::string many = serialize_dataset(run_sequence(c, 3));
  const bool ok = one == many && parse_dataset(one).records.size() == 32;
  return {"determinism", ok, ok ? "1 and 3 threads byte-identical" : "outputs differ"};
}

}  // namespace

bool SelftestReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string SelftestReport::text() const {
  std::ostringstream s;
  for (const auto& c : checks)
    s << (c.pass ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
  s << (pass() ? "selftest passed" : "selftest FAILED") << "\n";
  return s.str();
}

SelftestReport run_selftest(const SelftestOptions& options) {
  SelftestReport report;
  const std::function<SelftestCheck()> checks[] = {
      [&] { return check_budget(options); },
      [&] { return check_sensitivity(options); },
      [] { return check_crossovers(); },
      [] { return check_noiseless_fit(); },
      [&] { return check_thermal(options.seed); },
      [&] { return check_isolation(options.seed); },
      [&] { return check_determinism(options.seed); },
  };
  for (const auto& run : checks) {
    try {
      report.checks.push_back(run());
    } catch (const std::exception& e) {
      report.checks.push_back({"exception", false, e.what()});
    }
  }
  return report;
}

}  // namespace qnd
