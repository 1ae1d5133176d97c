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

#ifndef QNDNOISE_QNDNOISE_H_
#define QNDNOISE_QNDNOISE_H_

/*
 * C interface of the qndnoise library.
 *
 * Every function returns a qnd_status. QND_OK is zero; the other codes
 * double as the exit codes of the qndnoise command-line tool. After a
 * failure, qnd_last_error() returns a message for the calling thread.
 * Objects are opaque handles released with their matching *_free function;
 * strings handed out by the library are released with qnd_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(QND_BUILDING_LIBRARY)
#define QND_API __declspec(dllexport)
#else
#define QND_API __declspec(dllimport)
#endif
#else
#define QND_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qnd_status {
  QND_OK = 0,
  QND_ERR_CONFIG = 1,
  QND_ERR_IO = 2,
  QND_ERR_ESTIMATION = 3,
  QND_ERR_SELFTEST = 4,
  QND_ERR_INVALID_ARGUMENT = 5,
  QND_ERR_INTERNAL = 6
} qnd_status;

/* Plain parameter record: coupling G, electronic variance V_E, light and
 * atomic technical coefficients alpha and beta, spin quantum number F. */
typedef struct qnd_noise_params {
  double g;
  double v_e;
  double alpha;
  double beta;
  double f;
} qnd_noise_params;

typedef struct qnd_noise_budget {
  double electronic;
  double light_shot;
  double light_technical;
  double atomic_projection;
  double atomic_technical;
  double total;
  /* dB below projection for electronic, light_shot, light_technical,
   * atomic_technical (in that order); db_defined[i] is 0 where undefined. */
  double db[4];
  int db_defined[4];
} qnd_noise_budget;

typedef struct qnd_config qnd_config;
typedef struct qnd_dataset qnd_dataset;

QND_API const char* qnd_version(void);
QND_API const char* qnd_last_error(void);
QND_API void qnd_string_free(char* s);

/* ---- analytic model ---- */

QND_API qnd_status qnd_params_reference(qnd_noise_params* out);
QND_API qnd_status qnd_params_validate(const qnd_noise_params* params);
QND_API qnd_status qnd_variance_model(const qnd_noise_params* params,
                                      double n_atoms, double n_photons,
                                      double* out_variance);
QND_API qnd_status qnd_noise_budget_eval(const qnd_noise_params* params,
                                         double n_atoms, double n_photons,
                                         qnd_noise_budget* out);
QND_API qnd_status qnd_thermal_variance(double n_atoms, double f,
                                        double* out_variance);
QND_API qnd_status qnd_estimate_fz(double s_y_out, double n_photons, double g,
                                   double* out_fz);
QND_API qnd_status qnd_readout_noise_spins(const qnd_noise_params* params,
                                           double n_photons, double* out_spins);
/* Unbounded crossovers are reported with *_bounded = 0 and value INFINITY. */
QND_API qnd_status qnd_crossover_points(const qnd_noise_params* params,
                                        double* out_atoms, int* atoms_bounded,
                                        double* out_photons,
                                        int* photons_bounded);

/* ---- configuration ---- */

QND_API qnd_status qnd_config_default(qnd_config** out);
QND_API qnd_status qnd_config_load(const char* path, qnd_config** out);
QND_API qnd_status qnd_config_parse(const char* text, qnd_config** out);
/* dotted_key is "section.key", e.g. "sim.seed". */
QND_API qnd_status qnd_config_set(qnd_config* config, const char* dotted_key,
                                  const char* value);
/* Copies the configured io.* path ("input", "output", "fit_result") or
 * format ("format") into a new string; empty when unset. */
QND_API qnd_status qnd_config_get_io(const qnd_config* config,
                                     const char* key, char** out);
QND_API void qnd_config_free(qnd_config* config);

/* ---- simulation and datasets ---- */

/* threads == 0 uses all hardware threads. */
QND_API qnd_status qnd_simulate(const qnd_config* config, unsigned threads,
                                qnd_dataset** out);
QND_API qnd_status qnd_dataset_read(const char* path, qnd_dataset** out);
QND_API qnd_status qnd_dataset_write(const qnd_dataset* dataset,
                                     const char* path);
QND_API size_t qnd_dataset_record_count(const qnd_dataset* dataset);
QND_API void qnd_dataset_free(qnd_dataset* dataset);

/* Fits a dataset with the binning and fit options of config. */
QND_API qnd_status qnd_dataset_fit(const qnd_dataset* dataset,
                                   const qnd_config* config,
                                   qnd_noise_params* out_params,
                                   double* out_sigma_g,
                                   double* out_chi2_per_dof);

/* ---- command-line operations ----
 * Each writes its files, then returns the text for standard output in
 * *out_text (may be NULL). Empty path arguments fall back to io.* keys. */

QND_API qnd_status qnd_cmd_simulate(const qnd_config* config,
                                    const char* out_path, unsigned threads,
                                    char** out_text);
QND_API qnd_status qnd_cmd_fit(const qnd_config* config, const char* in_path,
                               const char* out_path, char** out_text);
/* format: "text", "csv", "json", or NULL/"" for io.format. */
QND_API qnd_status qnd_cmd_budget(const qnd_config* config,
                                  const char* format, const char* out_path,
                                  char** out_text);
QND_API qnd_status qnd_cmd_report(const qnd_config* config,
                                  const char* in_path, const char* fit_path,
                                  const char* out_prefix, char** out_text);
/* inject_v1 <= 0 disables fault injection. Returns QND_ERR_SELFTEST when any
 * check fails; the report is in *out_text either way. */
QND_API qnd_status qnd_cmd_selftest(uint64_t seed, double inject_v1,
                                    char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* QNDNOISE_QNDNOISE_H_ */
