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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Every tolerance is a named constant below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "process.hpp"
#include "qndnoise/commands.hpp"
#include "qndnoise/estimator.hpp"
#include "qndnoise/formats.hpp"
#include "qndnoise/model.hpp"
#include "qndnoise/sim.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = QND_CLI_PATH;

// Criterion 1
constexpr double kShotDb = 3.5, kShotTol = 0.2;
constexpr double kAtomicDb = 6.3, kAtomicTol = 0.2;
constexpr double kLightDb = 11.2, kLightTol = 0.3;
constexpr double kElectronicDb = 30.0, kElectronicTol = 1.0;
// Criterion 2
constexpr double kReadoutMin = 490.0, kReadoutMax = 540.0;
constexpr double kProjectionSpins = 712.0, kProjectionTol = 1.0;
constexpr double kMarginDb = 2.8, kMarginTol = 0.1;
// Criterion 3
constexpr double kCrossAtoms = 3.2e6, kCrossPhotons = 5.8e9, kCrossRel = 0.02;
// Criterion 4
constexpr double kNoiselessRel = 1e-8;
// Criterion 5
constexpr double kGRel = 0.02, kBetaRel = 0.35;
constexpr double kChi2Min = 0.7, kChi2Max = 1.4;
constexpr std::uint64_t kCampaignSeed = 7;
// Criterion 6
constexpr int kThermalDraws = 300000;
constexpr double kThermalSigmas = 3.0;
// Criterion 7
constexpr int kIsolationSamples = 500;
constexpr double kIsolationSigmas = 4.0;
// Criterion 8
constexpr double kConsistencySigmas = 3.0, kConsistencyRel = 0.10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol; }

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "qndnoise_acceptance";
  fs::create_directories(dir);
  return dir;
}

Outcome budget_margins() {
  const auto r = qnd_test::run_command(qnd_test::quote(kCli) + " budget --format json");
  if (r.exit_code != 0) return {false, "budget exited with " + std::to_string(r.exit_code)};
  const auto doc = nlohmann::json::parse(r.output);
  const auto& db = doc.at("db_below_projection");
  const double shot = db.at("light_shot"), atomic = db.at("atomic_technical");
  const double light = db.at("light_technical"), elec = db.at("electronic");
  const bool ok = within(shot, kShotDb, kShotTol) && within(atomic, kAtomicDb, kAtomicTol) &&
                  within(light, kLightDb, kLightTol) &&
                  within(elec, kElectronicDb, kElectronicTol);
  return {ok, fmt("shot %.2f, atomic tech %.2f, light tech %.2f, electronic %.2f dB", shot,
                  atomic, light, elec)};
}

Outcome sensitivity() {
  const auto p = qnd::NoiseParams::reference_defaults();
  const double readout = qnd::readout_noise_spins(p, 1e9);
  const double projection = std::sqrt(qnd::thermal_variance(7.6e5, p.f()));
  const double margin = qnd::to_db(projection * projection / (readout * readout));
  const bool ok = readout >= kReadoutMin && readout <= kReadoutMax &&
                  within(projection, kProjectionSpins, kProjectionTol) &&
                  within(margin, kMarginDb, kMarginTol);
  return {ok, fmt("readout %.2f spins, projection %.2f spins, margin %.3f dB", readout,
                  projection, margin)};
}

Outcome crossovers() {
  const auto c = qnd::crossover_points(qnd::NoiseParams::reference_defaults());
  if (!c.atoms || !c.photons) return {false, "unbounded crossover"};
  const bool ok = within(*c.atoms / kCrossAtoms, 1.0, kCrossRel) &&
                  within(*c.photons / kCrossPhotons, 1.0, kCrossRel);
  return {ok, fmt("N_A %.4g, N_L %.4g", *c.atoms, *c.photons)};
}

Outcome noiseless_fit() {
  const auto truth = qnd::NoiseParams::reference_defaults();
  std::vector<qnd::VariancePoint> grid;
  for (double na : {4e4, 1e5, 2.5e5, 5e5, 8e5})
    for (double nl : {2.5e7, 1e8, 4e8, 1e9})
      grid.push_back({na, nl, qnd::variance_model(truth, {na, nl}), 500});
  const auto fit = qnd::fit_noise_surface(grid);
  const double a = truth.g() * truth.g() * truth.v1() / 4.0;
  const double expected[4] = {truth.v_e(), truth.alpha(), a, truth.beta() * a};
  double worst = 0.0;
  for (int j = 0; j < 4; ++j)
    worst = std::max(worst, std::abs(fit.coefficients(j) / expected[j] - 1.0));
  return {worst < kNoiselessRel, fmt("max relative coefficient error %.2e", worst)};
}

struct CampaignResult {
  Outcome fit;
  Outcome consistency;
};

CampaignResult campaign() {
  qnd::SimConfig c;  // reference truth, 500 x 20, 8e5 atoms, 15% loss, 40 x 2.5e7 photons
  c.seed = kCampaignSeed;
  const auto ds = qnd::run_sequence(c, 0);
  const auto a = qnd::analyze_dataset(ds, {}, {});
  const auto& p = a.fit.params;
  const double g_err = p.g() / c.truth.g() - 1.0;
  const double beta_err = p.beta() / c.truth.beta() - 1.0;
  const double chi2 = a.fit.chi_square_per_dof();
  CampaignResult r;
  r.fit.pass = std::abs(g_err) <= kGRel && std::abs(beta_err) <= kBetaRel &&
               chi2 >= kChi2Min && chi2 <= kChi2Max;
  r.fit.detail = fmt(
      "seed %llu: G %.4e (%+.2f%%, reported sigma %.2f%%), beta %.3e (%+.1f%%), "
      "chi2/dof %.3f over %d dof",
      static_cast<unsigned long long>(c.seed), p.g(), 100 * g_err,
      100 * a.fit.sigma_g / p.g(), p.beta(), 100 * beta_err, chi2, a.fit.dof);
  if (!a.consistency) {
    r.consistency = {false, "no dispersive data"};
  } else {
    const auto& k = *a.consistency;
    r.consistency.pass = k.z_score < kConsistencySigmas && k.relative < kConsistencyRel;
    r.consistency.detail = fmt("dispersive G %.5e +- %.1e vs fit %.4e +- %.1e: z %.2f, %.2f%%",
                               k.g_dispersive, k.sigma_dispersive, k.g_fit, k.sigma_fit,
                               k.z_score, 100 * k.relative);
  }
  return r;
}

double enumerated_variance(int n) {
  std::map<int, double> dist{{0, 1.0}};
  for (int i = 0; i < n; ++i) {
    std::map<int, double> next;
    for (auto [v, p] : dist)
      for (int m = -1; m <= 1; ++m) next[v + m] += p / 3.0;
    dist = std::move(next);
  }
  double mean = 0.0, var = 0.0;
  for (auto [v, p] : dist) mean += v * p;
  for (auto [v, p] : dist) var += (v - mean) * (v - mean) * p;
  return var;
}

Outcome thermal_oracle() {
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 4; ++n) {
    const double exact = enumerated_variance(n);
    ok = ok && std::abs(exact - 2.0 * n / 3.0) < 1e-12;
    qnd::CounterRng rng(qnd::StreamId{20260, static_cast<std::uint32_t>(n), 0, qnd::Channel::kTest});
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < kThermalDraws; ++i) {
      const double x = qnd::sample_thermal_fz(n, 1.0, rng);
      const double d = x - mean;
      mean += d / (i + 1);
      m2 += d * (x - mean);
    }
    const double var = m2 / (kThermalDraws - 1);
    const double z = (var - exact) / (exact * std::sqrt(2.0 / (kThermalDraws - 1)));
    ok = ok && std::abs(z) < kThermalSigmas;
    detail += fmt("%sN=%d exact %.4f sampled %.4f (z %+.2f)", n > 1 ? ", " : "", n, exact, var, z);
  }
  return {ok, detail};
}

Outcome isolation() {
  const auto p = qnd::NoiseParams::reference_defaults();
  const double na = 8e5, nl = 1e9;
  const double gain = p.g() * p.g() * p.v1() * nl * nl / 4.0;
  const qnd::NoiseToggles off{false, false, false, false, false};
  struct Source {
    const char* name;
    bool qnd::NoiseToggles::*member;
    double expected;
  };
  const Source sources[] = {
      {"shot", &qnd::NoiseToggles::shot, nl / 4.0},
      {"electronic", &qnd::NoiseToggles::electronic, p.v_e()},
      {"light tech", &qnd::NoiseToggles::light_technical, p.alpha() * nl * nl},
      {"atomic tech", &qnd::NoiseToggles::atomic_technical, p.beta() * gain * na * na},
      {"projection", &qnd::NoiseToggles::projection, gain * na},
  };
  const double tol = kIsolationSigmas * std::sqrt(2.0 / (kIsolationSamples - 1));
  bool ok = true;
  std::string detail;
  for (const auto& s : sources) {
    qnd::SimConfig c;
    c.initial_atoms = na;
    c.loading_rms = 0.0;
    c.cycles_per_load = 1;
    c.repetitions = kIsolationSamples;
    c.meta_pulse_sizes = {40};
    c.meta_pulses_per_partition = 1;
    c.seed = 424242;
    c.noise = off;
    c.noise.*(s.member) = true;
    const auto table = qnd::tabulate_variances(qnd::run_sequence(c, 0));
    const double rel = table.points.at(0).variance / s.expected - 1.0;
    ok = ok && std::abs(rel) <= tol;
    detail += fmt("%s%s %+.1f%%", detail.empty() ? "" : ", ", s.name, 100 * rel);
  }
  return {ok, detail + fmt(" (tolerance %.1f%%)", 100 * tol)};
}

Outcome determinism() {
  const fs::path dir = work_dir();
  const std::string a = (dir / "det_a.csv").string(), b = (dir / "det_b.csv").string();
  const std::string cmd = " " + qnd_test::quote(kCli) + " simulate --seed 7 --out ";
  const auto r1 = qnd_test::run_command("QND_THREADS=1" + cmd + qnd_test::quote(a));
  const auto r2 = qnd_test::run_command("QND_THREADS=4" + cmd + qnd_test::quote(b));
  if (r1.exit_code != 0 || r2.exit_code != 0) return {false, "simulate failed"};
  const std::string x = qnd::read_file(a), y = qnd::read_file(b);
  const bool ok = x == y && !x.empty();
  return {ok, fmt("1 vs 4 threads: %zu bytes each, %s", x.size(),
                  ok ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };

  report(1, "dB budget", budget_margins);
  report(2, "sensitivity", sensitivity);
  report(3, "crossovers", crossovers);
  report(4, "noiseless fit round trip", noiseless_fit);
  CampaignResult c;
  report(5, "Monte Carlo fit round trip", [&] {
    c = campaign();
    return c.fit;
  });
  report(6, "thermal-state oracle", thermal_oracle);
  report(7, "single-source isolation", isolation);
  report(8, "calibration consistency", [&] { return c.consistency; });
  report(9, "determinism", determinism);

  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
