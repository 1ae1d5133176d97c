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

#include "qndnoise/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <utility>

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "qndnoise/error.hpp"

namespace qnd {

void SimConfig::validate() const {
  const double twice_f = 2.0 * truth.f();
  if (std::abs(twice_f - std::round(twice_f)) > 1e-12)
    throw_invalid("F must be an integer or half-integer for simulation");
  if (!(initial_atoms >= 0.0)) throw_invalid("initial_atoms must be >= 0");
  if (!(loading_rms >= 0.0)) throw_invalid("loading_rms must be >= 0");
  if (!(loss_per_cycle >= 0.0 && loss_per_cycle < 1.0))
    throw_invalid("loss_per_cycle must be in [0, 1)");
  if (cycles_per_load < 1) throw_invalid("cycles_per_load must be >= 1");
  if (repetitions < 2) throw_invalid("repetitions must be >= 2");
  if (pulses_per_train < 1) throw_invalid("pulses_per_train must be >= 1");
  if (!(photons_per_pulse > 0.0))
    throw_invalid("photons_per_pulse must be > 0");
  if (meta_pulse_sizes.empty())
    throw_invalid("meta_pulse_sizes must not be empty");
  for (int s : meta_pulse_sizes) {
    if (s < 1 || s > pulses_per_train)
      throw_invalid("meta_pulse_sizes entries must be in [1, pulses_per_train]");
  }
  if (meta_pulses_per_partition < 1)
    throw_invalid("meta_pulses_per_partition must be >= 1");
  if (!(dispersive_photons > 0.0))
    throw_invalid("dispersive_photons must be > 0");
  if (!(imaging_rms >= 0.0)) throw_invalid("imaging_rms must be >= 0");
  if (exact_sampling_threshold < 0)
    throw_invalid("exact_sampling_threshold must be >= 0");
}

double sample_thermal_fz(std::int64_t n_atoms, double f, CounterRng& rng,
                         std::int64_t exact_threshold) {
  if (n_atoms < 0) throw_invalid("n_atoms must be >= 0");
  if (n_atoms == 0) return 0.0;
  const double offset = static_cast<double>(n_atoms) * f;
  if (n_atoms <= exact_threshold) {
    const int top = static_cast<int>(std::lround(2.0 * f));
    boost::random::uniform_int_distribution<int> level(0, top);
    std::int64_t sum = 0;  // sum of (m + f), each in [0, 2f]
    for (std::int64_t i = 0; i < n_atoms; ++i) sum += level(rng);
    return static_cast<double>(sum) - offset;
  }
  const double sigma =
      std::sqrt(static_cast<double>(n_atoms) * per_atom_variance(f));
  return std::round(sigma * rng.normal() + offset) - offset;
}

double apply_atomic_technical_noise(double fz, double n_atoms,
                                    const NoiseParams& params,
                                    CounterRng& rng) {
  if (params.beta() == 0.0) return fz;
  const double sigma = n_atoms * std::sqrt(params.beta() * params.v1());
  return fz + sigma * rng.normal();
}

double simulate_pulse(double fz_effective, double n_photons,
                      double epsilon_imbalance, const NoiseParams& params,
                      CounterRng& rng, bool shot_noise) {
  if (!(n_photons > 0.0)) throw_invalid("n_photons must be > 0");
  const double half = n_photons / 2.0;
  double s_y = params.g() * half * fz_effective + epsilon_imbalance * half;
  if (shot_noise) s_y += std::sqrt(n_photons / 4.0) * rng.normal();
  return s_y;
}

std::vector<PulseSignal> aggregate_meta_pulses(
    std::span<const PulseSignal> pulses, std::span<const int> sizes,
    double electronic_variance, CounterRng& rng) {
  std::size_t needed = 0;
  for (int s : sizes) {
    if (s < 1) throw_invalid("meta-pulse sizes must be >= 1");
    needed += static_cast<std::size_t>(s);
  }
  if (needed > pulses.size())
    throw_invalid("meta-pulse sizes need " + std::to_string(needed) +
                  " pulses, only " + std::to_string(pulses.size()) +
                  " available");

  const double sigma_e = std::sqrt(electronic_variance);
  std::vector<PulseSignal> out;
  out.reserve(sizes.size());
  std::size_t next = 0;
  for (int s : sizes) {
    PulseSignal meta;
    for (int i = 0; i < s; ++i, ++next) {
      meta.n_photons += pulses[next].n_photons;
      meta.s_y += pulses[next].s_y;
    }
    if (electronic_variance > 0.0) meta.s_y += sigma_e * rng.normal();
    out.push_back(meta);
  }
  return out;
}

DispersiveResult simulate_dispersive_na(std::int64_t n_atoms,
                                        double n_photons,
                                        const NoiseParams& params,
                                        CounterRng& rng,
                                        const NoiseToggles& noise) {
  if (!(n_photons > 0.0)) throw_invalid("n_photons must be > 0");
  double s_y = params.g() * static_cast<double>(n_atoms) * n_photons / 2.0;
  if (noise.shot) s_y += std::sqrt(n_photons / 4.0) * rng.normal();
  if (noise.electronic) s_y += std::sqrt(params.v_e()) * rng.normal();
  DispersiveResult r;
  r.phi = 2.0 * s_y / n_photons;
  r.n_atoms = r.phi / params.g();
  return r;
}

double simulate_absorption_imaging(double n_atoms, double imaging_rms,
                                   CounterRng& rng) {
  if (!(imaging_rms >= 0.0)) throw_invalid("imaging_rms must be >= 0");
  if (imaging_rms == 0.0) return n_atoms;
  const double noisy = n_atoms * (1.0 + imaging_rms * rng.normal());
  return std::max(0.0, std::round(noisy));
}

std::int64_t binomial_thin(std::int64_t n, double keep, CounterRng& rng) {
  if (n < 0) throw_invalid("n must be >= 0");
  if (!(keep >= 0.0 && keep <= 1.0)) throw_invalid("keep must be in [0, 1]");
  if (n == 0 || keep == 1.0) return n;
  if (keep == 0.0) return 0;
  boost::random::binomial_distribution<std::int64_t, double> dist(n, keep);
  return dist(rng);
}

namespace {

CounterRng stream(const SimConfig& c, int rep, int cycle, Channel channel) {
  return CounterRng(StreamId{c.seed, static_cast<std::uint32_t>(rep),
                             static_cast<std::uint32_t>(cycle), channel});
}

void run_repetition(const SimConfig& c, int rep,
                    std::span<TrialRecord> out) {
  const NoiseParams& p = c.truth;
  const NoiseToggles& noise = c.noise;

  auto load_rng = stream(c, rep, 0, Channel::kLoading);
  std::int64_t atoms = static_cast<std::int64_t>(std::max(
      0.0,
      std::round(c.initial_atoms * (1.0 + c.loading_rms * load_rng.normal()))));

  std::vector<PulseSignal> pulses(static_cast<std::size_t>(c.pulses_per_train));
  for (int cycle = 0; cycle < c.cycles_per_load; ++cycle) {
    if (cycle > 0) {
      auto loss_rng = stream(c, rep, cycle, Channel::kLoss);
      atoms = binomial_thin(atoms, 1.0 - c.loss_per_cycle, loss_rng);
    }

    TrialRecord& r = out[static_cast<std::size_t>(cycle)];
    r.repetition = static_cast<std::uint32_t>(rep);
    r.cycle = static_cast<std::uint32_t>(cycle);
    r.n_atoms_true = atoms;

    if (noise.projection) {
      auto rng = stream(c, rep, cycle, Channel::kThermal);
      r.fz_true = sample_thermal_fz(atoms, p.f(), rng, c.exact_sampling_threshold);
    }
    r.fz_effective = r.fz_true;
    if (noise.atomic_technical) {
      auto rng = stream(c, rep, cycle, Channel::kAtomicTechnical);
      r.fz_effective = apply_atomic_technical_noise(
          r.fz_true, static_cast<double>(atoms), p, rng);
    }

    double epsilon = 0.0;
    if (noise.light_technical) {
      auto rng = stream(c, rep, cycle, Channel::kLightTechnical);
      epsilon = 2.0 * std::sqrt(p.alpha()) * rng.normal();
    }

    auto shot_rng = stream(c, rep, cycle, Channel::kShot);
    for (auto& pulse : pulses) {
      pulse.n_photons = c.photons_per_pulse;
      pulse.s_y = simulate_pulse(r.fz_effective, c.photons_per_pulse, epsilon,
                                 p, shot_rng, noise.shot);
    }

    auto electronic_rng = stream(c, rep, cycle, Channel::kElectronic);
    const double v_e = noise.electronic ? p.v_e() : 0.0;
    r.meta_pulses.clear();
    for (int size : c.meta_pulse_sizes) {
      const int count =
          std::min(c.pulses_per_train / size, c.meta_pulses_per_partition);
      const std::vector<int> sizes(static_cast<std::size_t>(count), size);
      const auto metas =
          aggregate_meta_pulses(pulses, sizes, v_e, electronic_rng);
      for (int i = 0; i < count; ++i) {
        r.meta_pulses.push_back(
            MetaPulse{size, i, metas[static_cast<std::size_t>(i)].n_photons,
                      metas[static_cast<std::size_t>(i)].s_y});
      }
    }

    auto dispersive_rng = stream(c, rep, cycle, Channel::kDispersive);
    r.dispersive_phi =
        simulate_dispersive_na(atoms, c.dispersive_photons, p, dispersive_rng,
                               noise)
            .phi;

    auto imaging_rng = stream(c, rep, cycle, Channel::kImaging);
    r.n_atoms_imaging = static_cast<std::int64_t>(simulate_absorption_imaging(
        static_cast<double>(atoms), c.imaging_rms, imaging_rng));
  }
}

}  // namespace

Dataset run_sequence(const SimConfig& config, unsigned threads) {
  config.validate();
  Dataset ds;
  ds.config = config;
  const auto cycles = static_cast<std::size_t>(config.cycles_per_load);
  ds.records.resize(static_cast<std::size_t>(config.repetitions) * cycles);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.repetitions));

  std::span<TrialRecord> all(ds.records);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int rep = next++; rep < config.repetitions; rep = next++) {
      run_repetition(config, rep,
                     all.subspan(static_cast<std::size_t>(rep) * cycles, cycles));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return ds;
}

VarianceTable tabulate_variances(const Dataset& dataset,
                                 const NaBinning& binning) {
  if (binning.cycles_per_bin < 1) throw_invalid("cycles_per_bin must be >= 1");

  struct Accumulator {
    double n_photons = 0.0;
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double atoms_sum = 0.0;
  };
  // key: (bin, partition size)
  std::map<std::pair<std::uint32_t, int>, Accumulator> groups;
  for (const auto& r : dataset.records) {
    const std::uint32_t bin =
        r.cycle / static_cast<std::uint32_t>(binning.cycles_per_bin);
    for (const auto& m : r.meta_pulses) {
      if (m.index != 0) continue;
      auto& acc = groups[{bin, m.partition}];
      acc.n_photons = m.n_photons;
      ++acc.count;
      const double delta = m.s_y - acc.mean;
      acc.mean += delta / static_cast<double>(acc.count);
      acc.m2 += delta * (m.s_y - acc.mean);
      acc.atoms_sum += static_cast<double>(r.n_atoms_imaging);
    }
  }

  VarianceTable table;
  for (const auto& [key, acc] : groups) {
    if (acc.count < 2) {
      ++table.dropped_bins;
      continue;
    }
    VariancePoint p;
    p.n_atoms = acc.atoms_sum / static_cast<double>(acc.count);
    p.n_photons = acc.n_photons;
    p.variance = acc.m2 / static_cast<double>(acc.count - 1);
    p.m_samples = acc.count;
    table.points.push_back(p);
  }
  return table;
}

}  // namespace qnd
