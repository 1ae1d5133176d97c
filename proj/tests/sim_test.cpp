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

#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "qndnoise/error.hpp"
#include "qndnoise/formats.hpp"
#include "qndnoise/model.hpp"
#include "qndnoise/sim.hpp"

using qnd::Channel;
using qnd::CounterRng;
using qnd::NoiseParams;
using qnd::NoiseToggles;
using qnd::SimConfig;
using qnd::StreamId;

namespace {

CounterRng test_rng(std::uint64_t seed, std::uint32_t sub = 0) {
  return CounterRng(StreamId{seed, sub, 0, Channel::kTest});
}

// Exact distribution of the sum of n spins, each uniform on {-1, 0, 1}:
// repeated convolution of the single-spin law.
std::map<int, double> exact_sum_distribution(int n) {
  std::map<int, double> dist{{0, 1.0}};
  for (int i = 0; i < n; ++i) {
    std::map<int, double> next;
    for (auto [v, p] : dist)
      for (int m = -1; m <= 1; ++m) next[v + m] += p / 3.0;
    dist = std::move(next);
  }
  return dist;
}

// Upper 0.1% quantiles of the chi-square distribution for 1..16 dof.
constexpr std::array<double, 17> kChi2Upper001 = {
    0.0,    10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124,
    27.877, 29.588, 31.264, 32.909, 34.528, 36.123, 37.697, 39.252};

double sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

SimConfig single_point_config(NoiseToggles toggles, int reps = 500) {
  SimConfig c;
  c.initial_atoms = 8e5;
  c.loading_rms = 0.0;
  c.cycles_per_load = 1;
  c.repetitions = reps;
  c.meta_pulse_sizes = {40};
  c.meta_pulses_per_partition = 1;
  c.noise = toggles;
  return c;
}

}  // namespace

TEST_CASE("thermal sampler matches exact enumeration") {
  constexpr int kDraws = 200000;
  for (int n = 1; n <= 4; ++n) {
    CAPTURE(n);
    const auto exact = exact_sum_distribution(n);
    double mean = 0.0, var = 0.0;
    for (auto [v, p] : exact) mean += v * p;
    for (auto [v, p] : exact) var += (v - mean) * (v - mean) * p;
    CHECK(var == doctest::Approx(2.0 * n / 3.0).epsilon(1e-14));

    auto rng = test_rng(11, static_cast<std::uint32_t>(n));
    std::map<int, long> counts;
    for (int i = 0; i < kDraws; ++i) {
      const double x = qnd::sample_thermal_fz(n, 1.0, rng);
      REQUIRE(x == std::round(x));
      ++counts[static_cast<int>(x)];
    }
    double chi2 = 0.0;
    for (auto [v, p] : exact) {
      const double expected = p * kDraws;
      const double d = static_cast<double>(counts[v]) - expected;
      chi2 += d * d / expected;
    }
    CHECK(counts.size() == exact.size());
    CHECK(chi2 < kChi2Upper001[exact.size() - 1]);
  }
}

TEST_CASE("thermal sampler edge cases and modes") {
  auto rng = test_rng(3);
  CHECK(qnd::sample_thermal_fz(0, 1.0, rng) == 0.0);
  CHECK_THROWS_AS(qnd::sample_thermal_fz(-1, 1.0, rng), qnd::Error);

  // Half-integer spins land on the lattice -n f + Z.
  for (int i = 0; i < 100; ++i) {
    const double x = qnd::sample_thermal_fz(3, 0.5, rng);
    CHECK(x + 1.5 == std::round(x + 1.5));
  }
  // Gaussian mode keeps the lattice too and has the right variance.
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) {
    const double x = qnd::sample_thermal_fz(7.6e5, 1.0, rng, 0);
    REQUIRE(x == std::round(x));
    xs.push_back(x);
  }
  const double v = sample_variance(xs);
  CHECK(std::abs(v / (7.6e5 * 2.0 / 3.0) - 1.0) < 4.0 * std::sqrt(2.0 / 19999));
  CHECK(std::abs(std::sqrt(v) - 712.0) < 12.0);
}

TEST_CASE("atomic technical noise") {
  const NoiseParams p = NoiseParams::reference_defaults();
  auto rng = test_rng(5);
  const NoiseParams no_beta(6.65e-8, 4.9e5, 4.3e-11, 0.0);
  CHECK(qnd::apply_atomic_technical_noise(17.0, 7.6e5, no_beta, rng) == 17.0);

  CHECK(7.6e5 * std::sqrt(p.beta() * p.v1()) == doctest::Approx(345.50).epsilon(1e-4));
  CHECK(1e3 * std::sqrt(p.beta() * p.v1()) == doctest::Approx(0.4546).epsilon(1e-3));
  CHECK(qnd::to_db(7.6e5 * p.v1() / (p.beta() * 7.6e5 * 7.6e5 * p.v1())) ==
        doctest::Approx(6.28).epsilon(0.005));

  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i)
    xs.push_back(qnd::apply_atomic_technical_noise(0.0, 7.6e5, p, rng));
  CHECK(std::abs(sample_variance(xs) / (345.5 * 345.5) - 1.0) <
        4.0 * std::sqrt(2.0 / 19999));
}

TEST_CASE("simulate_pulse") {
  const NoiseParams p = NoiseParams::reference_defaults();
  auto rng = test_rng(6);
  CHECK(qnd::simulate_pulse(1e5, 2.5e7, 0.0, p, rng, false) ==
        doctest::Approx(8.3125e4).epsilon(1e-14));
  CHECK(qnd::simulate_pulse(0.0, 2.5e7, 1e-6, p, rng, false) == doctest::Approx(12.5));
  CHECK_THROWS_AS(qnd::simulate_pulse(0.0, 0.0, 0.0, p, rng), qnd::Error);

  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(qnd::simulate_pulse(0.0, 2.5e7, 0.0, p, rng));
  CHECK(std::abs(sample_variance(xs) / 6.25e6 - 1.0) < 4.0 * std::sqrt(2.0 / 99999));
}

TEST_CASE("aggregate_meta_pulses") {
  auto rng = test_rng(7);
  std::vector<qnd::PulseSignal> pulses(40, {2.5e7, 3.0});
  const std::vector<int> one{40};
  auto m = qnd::aggregate_meta_pulses(pulses, one, 0.0, rng);
  REQUIRE(m.size() == 1);
  CHECK(m[0].n_photons == 1e9);
  CHECK(m[0].s_y == 120.0);

  const std::vector<int> four(4, 10);
  m = qnd::aggregate_meta_pulses(pulses, four, 0.0, rng);
  REQUIRE(m.size() == 4);
  for (const auto& x : m) CHECK(x.s_y == 30.0);

  const std::vector<int> ones(40, 1);
  m = qnd::aggregate_meta_pulses(pulses, ones, 4.9e5, rng);
  REQUIRE(m.size() == 40);
  CHECK(m[0].s_y != m[1].s_y);

  const std::vector<int> too_many{30, 20};
  CHECK_THROWS_AS(qnd::aggregate_meta_pulses(pulses, too_many, 0.0, rng), qnd::Error);
  const std::vector<int> bad{0};
  CHECK_THROWS_AS(qnd::aggregate_meta_pulses(pulses, bad, 0.0, rng), qnd::Error);
}

TEST_CASE("dispersive measurement and imaging") {
  const NoiseParams p = NoiseParams::reference_defaults();
  auto rng = test_rng(8);
  const NoiseToggles off{false, false, false, false, false};
  auto r = qnd::simulate_dispersive_na(100000, 1e9, p, rng, off);
  CHECK(r.phi == doctest::Approx(6.65e-3).epsilon(1e-14));
  CHECK(r.n_atoms == doctest::Approx(1e5).epsilon(1e-12));
  CHECK(qnd::simulate_dispersive_na(760000, 1e9, p, rng, off).phi ==
        doctest::Approx(0.05054).epsilon(1e-12));
  CHECK_THROWS_AS(qnd::simulate_dispersive_na(10, 0.0, p, rng), qnd::Error);

  NoiseToggles shot_only = off;
  shot_only.shot = true;
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i)
    xs.push_back(qnd::simulate_dispersive_na(100000, 1e9, p, rng, shot_only).n_atoms);
  CHECK(std::abs(std::sqrt(sample_variance(xs)) / 475.53 - 1.0) < 2.0 * std::sqrt(0.5 / 19999) * 2);

  CHECK(qnd::simulate_absorption_imaging(1e5, 0.0, rng) == 1e5);
  xs.clear();
  for (int i = 0; i < 10000; ++i) {
    const double n = qnd::simulate_absorption_imaging(1e5, 0.02, rng);
    REQUIRE(n >= 0.0);
    xs.push_back(n / 1e5);
  }
  CHECK(std::abs(std::sqrt(sample_variance(xs)) - 0.02) < 4.0 * 0.02 * std::sqrt(0.5 / 9999));
  CHECK(qnd::simulate_absorption_imaging(10.0, 5.0, rng) >= 0.0);
}

TEST_CASE("binomial thinning preserves expectation") {
  auto rng = test_rng(9);
  constexpr int kN = 20000;
  const std::int64_t n = 100000;
  double sum = 0.0;
  for (int i = 0; i < kN; ++i) sum += static_cast<double>(qnd::binomial_thin(n, 0.85, rng));
  const double sigma_mean = std::sqrt(n * 0.85 * 0.15 / kN);
  CHECK(std::abs(sum / kN - 0.85 * n) < 3.0 * sigma_mean);
  CHECK(qnd::binomial_thin(0, 0.5, rng) == 0);
  CHECK(qnd::binomial_thin(10, 1.0, rng) == 10);
  CHECK(qnd::binomial_thin(10, 0.0, rng) == 0);
  CHECK_THROWS_AS(qnd::binomial_thin(10, 1.5, rng), qnd::Error);
}

TEST_CASE("SimConfig validation names the field") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  auto message = [](SimConfig bad) {
    try {
      bad.validate();
    } catch (const qnd::Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  c.loss_per_cycle = 1.2;
  CHECK(message(c).rfind("loss_per_cycle", 0) == 0);
  c = SimConfig{};
  c.meta_pulse_sizes = {80};
  CHECK(message(c).rfind("meta_pulse_sizes", 0) == 0);
  c = SimConfig{};
  c.repetitions = 1;
  CHECK(message(c).rfind("repetitions", 0) == 0);
  c = SimConfig{};
  c.truth = NoiseParams(6.65e-8, 0, 0, 0, 1.2);
  CHECK(message(c).rfind("F ", 0) == 0);
}

TEST_CASE("run_sequence shape and atom decay") {
  SimConfig c;
  c.repetitions = 500;
  const auto ds = qnd::run_sequence(c);
  REQUIRE(ds.records.size() == 10000);
  CHECK(ds.version == qnd::kVersionTag);
  double first = 0.0, last = 0.0;
  for (const auto& r : ds.records) {
    if (r.cycle == 0) first += static_cast<double>(r.n_atoms_true);
    if (r.cycle == 19) last += static_cast<double>(r.n_atoms_true);
    CHECK(r.meta_pulses.size() == 2 + 2 + 2 + 2 + 2 + 1);
  }
  first /= 500;
  last /= 500;
  CHECK(std::abs(first / 8e5 - 1.0) < 0.01);
  const double expected = 8e5 * std::pow(0.85, 19);
  CHECK(expected == doctest::Approx(36479.56).epsilon(1e-6));
  CHECK(std::abs(last / expected - 1.0) < 0.01);
}

TEST_CASE("determinism under thread counts") {
  SimConfig c;
  c.repetitions = 12;
  c.cycles_per_load = 5;
  const std::string a = qnd::serialize_dataset(qnd::run_sequence(c, 1));
  const std::string b = qnd::serialize_dataset(qnd::run_sequence(c, 1));
  const std::string d = qnd::serialize_dataset(qnd::run_sequence(c, 4));
  CHECK(a == b);
  CHECK(a == d);
  c.seed = 8;
  CHECK(a != qnd::serialize_dataset(qnd::run_sequence(c, 1)));
}

TEST_CASE("single-source isolation within the variance-of-variance bound") {
  const NoiseParams p = NoiseParams::reference_defaults();
  const double nl = 1e9, na = 8e5;
  const double gain = p.g() * p.g() * p.v1() * nl * nl / 4.0;
  const NoiseToggles off{false, false, false, false, false};
  struct Case {
    bool NoiseToggles::*member;
    double expected;
  };
  const Case cases[] = {
      {&NoiseToggles::shot, nl / 4.0},
      {&NoiseToggles::electronic, p.v_e()},
      {&NoiseToggles::light_technical, p.alpha() * nl * nl},
      {&NoiseToggles::atomic_technical, p.beta() * gain * na * na},
      {&NoiseToggles::projection, gain * na},
  };
  const double tol = 4.0 * std::sqrt(2.0 / 499.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& k : cases) {
      NoiseToggles t = off;
      t.*(k.member) = true;
      auto c = single_point_config(t);
      c.seed = seed;
      const auto table = qnd::tabulate_variances(qnd::run_sequence(c));
      REQUIRE(table.points.size() == 1);
      CHECK(table.points[0].m_samples == 500);
      CHECK(std::abs(table.points[0].variance / k.expected - 1.0) <= tol);
    }
  }
}

TEST_CASE("tabulate_variances") {
  SUBCASE("shot-only at N_L = 1e9") {
    NoiseToggles t{true, false, false, false, false};
    const auto table = qnd::tabulate_variances(qnd::run_sequence(single_point_config(t)));
    REQUIRE(table.points.size() == 1);
    CHECK(table.points[0].n_photons == 1e9);
    CHECK(std::abs(table.points[0].variance / 2.5e8 - 1.0) <= 2.0 * std::sqrt(2.0 / 499.0));
  }
  SUBCASE("constant signals give zero variance") {
    NoiseToggles t{false, false, false, false, false};
    const auto table = qnd::tabulate_variances(qnd::run_sequence(single_point_config(t, 10)));
    REQUIRE(table.points.size() == 1);
    CHECK(table.points[0].variance == 0.0);
  }
  SUBCASE("reference truth, largest bin") {
    SimConfig c;
    const auto table = qnd::tabulate_variances(qnd::run_sequence(c));
    CHECK(table.points.size() == 20 * 6);
    CHECK(table.dropped_bins == 0);
    const qnd::VariancePoint* largest = nullptr;
    for (const auto& pt : table.points)
      if (pt.n_photons == 1e9 && (!largest || pt.n_atoms > largest->n_atoms)) largest = &pt;
    REQUIRE(largest);
    const double model = qnd::variance_model(c.truth, {largest->n_atoms, 1e9});
    CHECK(std::abs(largest->n_atoms / 8e5 - 1.0) < 0.01);
    // At the reference operating point the model total is about 9.9e8.
    CHECK(qnd::variance_model(c.truth, {7.6e5, 1e9}) == doctest::Approx(9.9e8).epsilon(0.005));
    CHECK(std::abs(largest->variance / model - 1.0) <= 4.0 * std::sqrt(2.0 / 499.0));
  }
  SUBCASE("bins with fewer than two samples are dropped") {
    SimConfig c;
    c.repetitions = 2;
    c.cycles_per_load = 2;
    auto ds = qnd::run_sequence(c);
    ds.records.erase(ds.records.begin());  // cycle 0 of repetition 0
    const auto table = qnd::tabulate_variances(ds);
    CHECK(table.dropped_bins == 6);
    CHECK(table.points.size() == 6);
  }
  SUBCASE("pooled binning") {
    SimConfig c;
    c.repetitions = 20;
    const auto table = qnd::tabulate_variances(qnd::run_sequence(c), {5});
    CHECK(table.points.size() == 4 * 6);
    for (const auto& pt : table.points) CHECK(pt.m_samples == 100);
    CHECK_THROWS_AS(qnd::tabulate_variances(qnd::run_sequence(c), {0}), qnd::Error);
  }
}

TEST_CASE("split-half meta-pulses share the atomic signal") {
  SimConfig c = single_point_config({true, true, true, false, true}, 20000);
  c.meta_pulse_sizes = {20};
  c.meta_pulses_per_partition = 2;
  const auto ds = qnd::run_sequence(c);
  const double g = c.truth.g(), half_nl = 20 * 2.5e7 / 2.0;
  std::vector<double> a, b, fz;
  for (const auto& r : ds.records) {
    a.push_back(r.meta_pulses.at(0).s_y);
    b.push_back(r.meta_pulses.at(1).s_y);
    fz.push_back(r.fz_effective);
  }
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  double cov = 0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
  cov /= a.size() - 1;
  const double atomic = g * g * half_nl * half_nl * sample_variance(fz);
  // The light imbalance is common to both halves as well.
  const double light = c.truth.alpha() * 4.0 * half_nl * half_nl;
  CHECK(cov >= (atomic + light) * (1.0 - 0.05));
  CHECK(cov <= (atomic + light) * 1.10);
}
