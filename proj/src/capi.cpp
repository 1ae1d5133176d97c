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

#include "qndnoise/qndnoise.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "qndnoise/commands.hpp"
#include "qndnoise/config.hpp"
#include "qndnoise/error.hpp"
#include "qndnoise/formats.hpp"
#include "qndnoise/selftest.hpp"
#include "qndnoise/sim.hpp"

struct qnd_config {
  qnd::RunConfig value;
};

struct qnd_dataset {
  qnd::Dataset value;
};

namespace {

thread_local std::string g_last_error;

qnd_status fail(qnd_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
qnd_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return QND_OK;
  } catch (const qnd::Error& e) {
    return fail(static_cast<qnd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QND_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QND_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QND_ERR_INTERNAL, "unknown exception");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void hand_out(const std::string& text, char** out_text) {
  if (out_text) *out_text = duplicate(text);
}

qnd::NoiseParams to_params(const qnd_noise_params* p) {
  if (!p) qnd::throw_invalid("params is NULL");
  return qnd::NoiseParams(p->g, p->v_e, p->alpha, p->beta, p->f);
}

void require(const void* ptr, const char* what) {
  if (!ptr) qnd::throw_invalid(std::string(what) + " is NULL");
}

std::string or_default(const char* arg, const std::string& fallback) {
  return (arg && *arg) ? std::string(arg) : fallback;
}

}  // namespace

extern "C" {

const char* qnd_version(void) { return qnd::kVersionTag; }

const char* qnd_last_error(void) { return g_last_error.c_str(); }

void qnd_string_free(char* s) { std::free(s); }

qnd_status qnd_params_reference(qnd_noise_params* out) {
  return guarded([&] {
    require(out, "out");
    const auto p = qnd::NoiseParams::reference_defaults();
    *out = {p.g(), p.v_e(), p.alpha(), p.beta(), p.f()};
  });
}

qnd_status qnd_params_validate(const qnd_noise_params* params) {
  return guarded([&] { (void)to_params(params); });
}

qnd_status qnd_variance_model(const qnd_noise_params* params, double n_atoms,
                              double n_photons, double* out_variance) {
  return guarded([&] {
    require(out_variance, "out_variance");
    *out_variance = qnd::variance_model(to_params(params), {n_atoms, n_photons});
  });
}

qnd_status qnd_noise_budget_eval(const qnd_noise_params* params, double n_atoms,
                                 double n_photons, qnd_noise_budget* out) {
  return guarded([&] {
    require(out, "out");
    const auto b = qnd::noise_budget(to_params(params), {n_atoms, n_photons});
    out->electronic = b.electronic;
    out->light_shot = b.light_shot;
    out->light_technical = b.light_technical;
    out->atomic_projection = b.atomic_projection;
    out->atomic_technical = b.atomic_technical;
    out->total = b.total;
    const qnd::NoiseTerm order[4] = {
        qnd::NoiseTerm::kElectronic, qnd::NoiseTerm::kLightShot,
        qnd::NoiseTerm::kLightTechnical, qnd::NoiseTerm::kAtomicTechnical};
    for (int i = 0; i < 4; ++i) {
      const auto db = b.db_below_projection(order[i]);
      out->db[i] = db.value_or(std::numeric_limits<double>::quiet_NaN());
      out->db_defined[i] = db.has_value() ? 1 : 0;
    }
  });
}

qnd_status qnd_thermal_variance(double n_atoms, double f, double* out_variance) {
  return guarded([&] {
    require(out_variance, "out_variance");
    *out_variance = qnd::thermal_variance(n_atoms, f);
  });
}

qnd_status qnd_estimate_fz(double s_y_out, double n_photons, double g,
                           double* out_fz) {
  return guarded([&] {
    require(out_fz, "out_fz");
    *out_fz = qnd::estimate_fz(s_y_out, n_photons, g);
  });
}

qnd_status qnd_readout_noise_spins(const qnd_noise_params* params,
                                   double n_photons, double* out_spins) {
  return guarded([&] {
    require(out_spins, "out_spins");
    *out_spins = qnd::readout_noise_spins(to_params(params), n_photons);
  });
}

qnd_status qnd_crossover_points(const qnd_noise_params* params,
                                double* out_atoms, int* atoms_bounded,
                                double* out_photons, int* photons_bounded) {
  return guarded([&] {
    require(out_atoms, "out_atoms");
    require(out_photons, "out_photons");
    const auto c = qnd::crossover_points(to_params(params));
    const double inf = std::numeric_limits<double>::infinity();
    *out_atoms = c.atoms.value_or(inf);
    *out_photons = c.photons.value_or(inf);
    if (atoms_bounded) *atoms_bounded = c.atoms.has_value() ? 1 : 0;
    if (photons_bounded) *photons_bounded = c.photons.has_value() ? 1 : 0;
  });
}

qnd_status qnd_config_default(qnd_config** out) {
  return guarded([&] {
    require(out, "out");
    auto cfg = std::make_unique<qnd_config>();
    cfg->value.finalize();
    *out = cfg.release();
  });
}

qnd_status qnd_config_load(const char* path, qnd_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new qnd_config{qnd::RunConfig::load(path)};
  });
}

qnd_status qnd_config_parse(const char* text, qnd_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new qnd_config{qnd::RunConfig::parse(text)};
  });
}

qnd_status qnd_config_set(qnd_config* config, const char* dotted_key,
                          const char* value) {
  return guarded([&] {
    require(config, "config");
    require(dotted_key, "dotted_key");
    require(value, "value");
    qnd::RunConfig copy = config->value;
    copy.set(dotted_key, value);
    config->value = std::move(copy);
  });
}

qnd_status qnd_config_get_io(const qnd_config* config, const char* key,
                             char** out) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(out, "out");
    const auto& c = config->value;
    const std::string k = key;
    std::string v;
    if (k == "input") v = c.input;
    else if (k == "output") v = c.output;
    else if (k == "fit_result") v = c.fit_result;
    else if (k == "format") {
      v = c.format == qnd::OutputFormat::kJson  ? "json"
          : c.format == qnd::OutputFormat::kCsv ? "csv"
                                                : "text";
    } else qnd::throw_invalid("unknown io key '" + k + "'");
    *out = duplicate(v);
  });
}

void qnd_config_free(qnd_config* config) { delete config; }

qnd_status qnd_simulate(const qnd_config* config, unsigned threads,
                        qnd_dataset** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = new qnd_dataset{qnd::run_sequence(config->value.sim, threads)};
  });
}

qnd_status qnd_dataset_read(const char* path, qnd_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new qnd_dataset{qnd::parse_dataset(qnd::read_file(path))};
  });
}

qnd_status qnd_dataset_write(const qnd_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    qnd::write_file_atomic(path, qnd::serialize_dataset(dataset->value));
  });
}

size_t qnd_dataset_record_count(const qnd_dataset* dataset) {
  return dataset ? dataset->value.records.size() : 0;
}

void qnd_dataset_free(qnd_dataset* dataset) { delete dataset; }

qnd_status qnd_dataset_fit(const qnd_dataset* dataset, const qnd_config* config,
                           qnd_noise_params* out_params, double* out_sigma_g,
                           double* out_chi2_per_dof) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    const auto a = qnd::analyze_dataset(dataset->value, config->value.binning,
                                        config->value.fit);
    const auto& p = a.fit.params;
    if (out_params) *out_params = {p.g(), p.v_e(), p.alpha(), p.beta(), p.f()};
    if (out_sigma_g) *out_sigma_g = a.fit.sigma_g;
    if (out_chi2_per_dof) *out_chi2_per_dof = a.fit.chi_square_per_dof();
  });
}

qnd_status qnd_cmd_simulate(const qnd_config* config, const char* out_path,
                            unsigned threads, char** out_text) {
  return guarded([&] {
    require(config, "config");
    const auto& c = config->value;
    hand_out(qnd::cmd_simulate(c, or_default(out_path, c.output), threads),
             out_text);
  });
}

qnd_status qnd_cmd_fit(const qnd_config* config, const char* in_path,
                       const char* out_path, char** out_text) {
  return guarded([&] {
    require(config, "config");
    const auto& c = config->value;
    hand_out(qnd::cmd_fit(c, or_default(in_path, c.input),
                          or_default(out_path, c.output)),
             out_text);
  });
}

qnd_status qnd_cmd_budget(const qnd_config* config, const char* format,
                          const char* out_path, char** out_text) {
  return guarded([&] {
    require(config, "config");
    const auto& c = config->value;
    qnd::OutputFormat f = c.format;
    if (format && *format) {
      const std::string s = format;
      if (s == "text") f = qnd::OutputFormat::kText;
      else if (s == "csv") f = qnd::OutputFormat::kCsv;
      else if (s == "json") f = qnd::OutputFormat::kJson;
      else throw qnd::Error(qnd::ErrorCode::kConfig, "unknown format '" + s + "'");
    }
    hand_out(qnd::cmd_budget(c, f, or_default(out_path, c.output)), out_text);
  });
}

qnd_status qnd_cmd_report(const qnd_config* config, const char* in_path,
                          const char* fit_path, const char* out_prefix,
                          char** out_text) {
  return guarded([&] {
    require(config, "config");
    const auto& c = config->value;
    hand_out(qnd::cmd_report(c, or_default(in_path, c.input),
                             or_default(fit_path, c.fit_result),
                             or_default(out_prefix, c.output)),
             out_text);
  });
}

qnd_status qnd_cmd_selftest(uint64_t seed, double inject_v1, char** out_text) {
  bool passed = false;
  const qnd_status status = guarded([&] {
    qnd::SelftestOptions options;
    options.seed = seed;
    if (inject_v1 > 0.0) options.inject_v1 = inject_v1;
    const auto report = qnd::run_selftest(options);
    passed = report.pass();
    hand_out(report.text(), out_text);
  });
  if (status != QND_OK) return status;
  if (!passed) return fail(QND_ERR_SELFTEST, "one or more selftest checks failed");
  return QND_OK;
}

}  // extern "C"
