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

// qndnoise: simulate, fit, and budget QND Faraday-rotation spin-noise
// measurements. Exit codes: 0 ok, 1 config, 2 I/O, 3 estimation, 4 selftest.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qndnoise/qndnoise.h"

namespace {

struct ConfigDeleter {
  void operator()(qnd_config* c) const { qnd_config_free(c); }
};
using ConfigPtr = std::unique_ptr<qnd_config, ConfigDeleter>;

int exit_code(qnd_status status) {
  switch (status) {
    case QND_OK:
      return 0;
    case QND_ERR_CONFIG:
    case QND_ERR_INVALID_ARGUMENT:
    case QND_ERR_INTERNAL:
      return 1;
    default:
      return static_cast<int>(status);
  }
}

int report_failure(qnd_status status) {
  std::fprintf(stderr, "qndnoise: %s\n", qnd_last_error());
  return exit_code(status);
}

// Prints and frees a library-owned string.
void emit(char* text, std::FILE* stream = stdout) {
  if (!text) return;
  std::fputs(text, stream);
  qnd_string_free(text);
}

unsigned thread_count() {
  const char* env = std::getenv("QND_THREADS");
  if (!env || !*env) return 0;
  return static_cast<unsigned>(std::strtoul(env, nullptr, 10));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QND spin-noise calibration toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qnd_version()));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format;
  std::string input_path;
  std::string fit_path;
  double inject_v1 = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Output path (prefix for report)");
  };

  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo campaign");
  add_common(simulate);
  simulate->add_option("--seed", seed, "Master seed (overrides sim.seed)");

  auto* fit = app.add_subcommand("fit", "Fit the noise model to a dataset");
  add_common(fit);
  fit->add_option("--input", input_path, "Dataset or variance-table CSV");

  auto* budget = app.add_subcommand("budget", "Print the noise budget");
  add_common(budget);
  budget->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  auto* report = app.add_subcommand("report", "Write plot-ready scan tables");
  add_common(report);
  report->add_option("--input", input_path, "Dataset CSV");
  report->add_option("--fit-result", fit_path, "Results file from `fit`");

  auto* selftest = app.add_subcommand("selftest", "Run the fast acceptance subset");
  selftest->add_option("--seed", seed, "Seed for the statistical checks");
  selftest->add_option("--inject-v1", inject_v1,
                       "Fault injection: per-atom variance used by budget checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (selftest->parsed()) {
    char* text = nullptr;
    const qnd_status s = qnd_cmd_selftest(seed.value_or(1), inject_v1, &text);
    emit(text);
    if (s != QND_OK) return report_failure(s);
    return 0;
  }

  qnd_config* raw = nullptr;
  const qnd_status loaded = config_path.empty()
                                ? qnd_config_default(&raw)
                                : qnd_config_load(config_path.c_str(), &raw);
  if (loaded != QND_OK) return report_failure(loaded);
  ConfigPtr config(raw);

  if (seed) {
    const std::string value = std::to_string(*seed);
    const qnd_status s = qnd_config_set(config.get(), "sim.seed", value.c_str());
    if (s != QND_OK) return report_failure(s);
  }

  char* text = nullptr;
  qnd_status status = QND_OK;
  if (simulate->parsed()) {
    status = qnd_cmd_simulate(config.get(), out_path.c_str(), thread_count(), &text);
  } else if (fit->parsed()) {
    status = qnd_cmd_fit(config.get(), input_path.c_str(), out_path.c_str(), &text);
  } else if (budget->parsed()) {
    status = qnd_cmd_budget(config.get(), format.c_str(), out_path.c_str(), &text);
  } else if (report->parsed()) {
    status = qnd_cmd_report(config.get(), input_path.c_str(), fit_path.c_str(),
                            out_path.c_str(), &text);
  }
  emit(text);
  if (status != QND_OK) return report_failure(status);
  return 0;
}
