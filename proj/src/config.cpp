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

#include "qndnoise/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qndnoise/error.hpp"

namespace qnd {
namespace {

constexpr std::string_view kSections[] = {"run",   "io",    "params", "point",
                                          "sim",   "noise", "fit",    "report"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw Error(ErrorCode::kConfig, std::string(key) + ": invalid value '" +
                                      std::string(value) + "' (expected " +
                                      std::string(expected) + ")");
}

double as_double(std::string_view key, std::string_view value) {
  auto v = parse_double(value);
  if (!v || !std::isfinite(*v)) bad_value(key, value, "a number");
  return *v;
}

std::int64_t as_int(std::string_view key, std::string_view value) {
  auto v = parse_int(value);
  if (!v) bad_value(key, value, "an integer");
  return *v;
}

int as_int32(std::string_view key, std::string_view value) {
  const auto v = as_int(key, value);
  if (v < -2147483647 || v > 2147483647) bad_value(key, value, "a 32-bit integer");
  return static_cast<int>(v);
}

bool as_bool(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes")
    return true;
  if (value == "off" || value == "false" || value == "0" || value == "no")
    return false;
  bad_value(key, value, "on|off");
}

std::vector<int> as_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (item.empty()) bad_value(key, value, "a comma-separated integer list");
    out.push_back(as_int32(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, value, "a comma-separated integer list");
  return out;
}

std::string on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty())
    return v;
  // Accept integral values written in floating notation, e.g. 1e4.
  auto d = parse_double(text);
  if (d && std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 9e15)
    return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

void RunConfig::apply(std::string_view section, std::string_view key,
                      std::string_view value) {
  const std::string dotted = std::string(section) + "." + std::string(key);
  auto unknown = [&]() -> void {
    throw Error(ErrorCode::kConfig, "unknown key '" + dotted + "'");
  };

  if (section == "run") {
    if (key == "mode") mode = std::string(value);
    else unknown();
  } else if (section == "io") {
    if (key == "input") input = std::string(value);
    else if (key == "output") output = std::string(value);
    else if (key == "fit_result") fit_result = std::string(value);
    else if (key == "format") {
      if (value == "text") format = OutputFormat::kText;
      else if (value == "csv") format = OutputFormat::kCsv;
      else if (value == "json") format = OutputFormat::kJson;
      else bad_value(dotted, value, "text|csv|json");
    } else unknown();
  } else if (section == "params") {
    if (key == "G") params_block.g = as_double(dotted, value);
    else if (key == "V_E") params_block.v_e = as_double(dotted, value);
    else if (key == "alpha") params_block.alpha = as_double(dotted, value);
    else if (key == "beta") params_block.beta = as_double(dotted, value);
    else if (key == "F") params_block.f = as_double(dotted, value);
    else unknown();
  } else if (section == "point") {
    if (key == "n_atoms") point.n_atoms = as_double(dotted, value);
    else if (key == "n_photons") point.n_photons = as_double(dotted, value);
    else unknown();
  } else if (section == "sim") {
    if (key == "initial_atoms") sim.initial_atoms = as_double(dotted, value);
    else if (key == "loading_rms") sim.loading_rms = as_double(dotted, value);
    else if (key == "loss_per_cycle") sim.loss_per_cycle = as_double(dotted, value);
    else if (key == "cycles_per_load") sim.cycles_per_load = as_int32(dotted, value);
    else if (key == "repetitions") sim.repetitions = as_int32(dotted, value);
    else if (key == "pulses_per_train") sim.pulses_per_train = as_int32(dotted, value);
    else if (key == "photons_per_pulse") sim.photons_per_pulse = as_double(dotted, value);
    else if (key == "meta_pulse_sizes") sim.meta_pulse_sizes = as_int_list(dotted, value);
    else if (key == "meta_pulses_per_partition")
      sim.meta_pulses_per_partition = as_int32(dotted, value);
    else if (key == "dispersive_photons") sim.dispersive_photons = as_double(dotted, value);
    else if (key == "imaging_rms") sim.imaging_rms = as_double(dotted, value);
    else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto v = trim(value);
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
      if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        bad_value(dotted, value, "an unsigned 64-bit integer");
      sim.seed = seed;
    } else if (key == "exact_sampling_threshold")
      sim.exact_sampling_threshold = as_int(dotted, value);
    else unknown();
  } else if (section == "noise") {
    if (key == "shot") sim.noise.shot = as_bool(dotted, value);
    else if (key == "electronic") sim.noise.electronic = as_bool(dotted, value);
    else if (key == "light_technical") sim.noise.light_technical = as_bool(dotted, value);
    else if (key == "atomic_technical") sim.noise.atomic_technical = as_bool(dotted, value);
    else if (key == "projection") sim.noise.projection = as_bool(dotted, value);
    else unknown();
  } else if (section == "fit") {
    if (key == "cycles_per_bin") binning.cycles_per_bin = as_int32(dotted, value);
    else if (key == "fit_shot_term") fit.fit_shot_term = as_bool(dotted, value);
    else if (key == "max_iterations") fit.max_iterations = as_int32(dotted, value);
    else if (key == "tolerance") fit.tolerance = as_double(dotted, value);
    else unknown();
  } else if (section == "report") {
    if (key == "fixed_photons") report_fixed_photons = as_double(dotted, value);
    else if (key == "fixed_atoms") report_fixed_atoms = as_double(dotted, value);
    else unknown();
  } else {
    throw Error(ErrorCode::kConfig, "unknown section '" + std::string(section) + "'");
  }
}

std::string RunConfig::where(std::string_view dotted_key) const {
  auto it = lines_.find(dotted_key);
  if (it == lines_.end()) return source_;
  if (it->second <= 0) return "command line";
  return source_ + ":" + std::to_string(it->second);
}

NoiseParams RunConfig::params() const {
  return NoiseParams(params_block.g, params_block.v_e, params_block.alpha,
                     params_block.beta, params_block.f);
}

void RunConfig::finalize() {
  // Validation messages start with the offending field name; map it back
  // to the line that set it.
  auto anchored = [&](std::string_view section, const Error& e) {
    std::string msg = e.what();
    const auto space = msg.find(' ');
    const std::string field = msg.substr(0, space);
    std::string key = std::string(section) + "." + field;
    return Error(ErrorCode::kConfig, where(key) + ": " + msg);
  };

  try {
    sim.truth = params();
  } catch (const Error& e) {
    throw anchored("params", e);
  }
  try {
    point.validate();
  } catch (const Error& e) {
    throw anchored("point", e);
  }
  try {
    sim.validate();
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.rfind("F ", 0) == 0) throw anchored("params", e);
    throw anchored("sim", e);
  }
  if (binning.cycles_per_bin < 1)
    throw Error(ErrorCode::kConfig,
                where("fit.cycles_per_bin") + ": cycles_per_bin must be >= 1");
  if (fit.max_iterations < 1)
    throw Error(ErrorCode::kConfig,
                where("fit.max_iterations") + ": max_iterations must be >= 1");
  if (!(fit.tolerance > 0.0))
    throw Error(ErrorCode::kConfig,
                where("fit.tolerance") + ": tolerance must be > 0");
  if (!(report_fixed_photons > 0.0))
    throw Error(ErrorCode::kConfig, where("report.fixed_photons") +
                                        ": fixed_photons must be > 0");
  if (!(report_fixed_atoms >= 0.0))
    throw Error(ErrorCode::kConfig,
                where("report.fixed_atoms") + ": fixed_atoms must be >= 0");
}

RunConfig RunConfig::parse(std::string_view text, std::string_view source) {
  RunConfig cfg;
  cfg.source_ = std::string(source);
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    const std::string at = cfg.source_ + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorCode::kConfig, at + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty())
        throw Error(ErrorCode::kConfig, at + "empty section name");
      if (std::find(std::begin(kSections), std::end(kSections), section) ==
          std::end(kSections))
        throw Error(ErrorCode::kConfig, at + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::kConfig, at + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (section.empty())
      throw Error(ErrorCode::kConfig, at + "key outside of any [section]");
    if (key.empty()) throw Error(ErrorCode::kConfig, at + "empty key");
    try {
      cfg.apply(section, key, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, at + e.what());
    }
    cfg.lines_[section + "." + std::string(key)] = line_no;
  }
  cfg.finalize();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::set(std::string_view dotted_key, std::string_view value) {
  set_many({{std::string(dotted_key), std::string(value)}});
}

void RunConfig::set_many(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  // Work on a copy so a rejected override leaves this object untouched.
  RunConfig next = *this;
  next.apply_overrides(entries);
  *this = std::move(next);
}

void RunConfig::apply_overrides(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [dotted_key, value] : entries) {
    const auto dot = dotted_key.find('.');
    if (dot == std::string::npos)
      throw Error(ErrorCode::kConfig,
                  "command line: expected section.key, got '" + dotted_key + "'");
    try {
      apply(std::string_view(dotted_key).substr(0, dot),
            std::string_view(dotted_key).substr(dot + 1), trim(value));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, std::string("command line: ") + e.what());
    }
    lines_[dotted_key] = 0;
  }
  finalize();
}

std::vector<std::pair<std::string, std::string>> canonical_sim_entries(
    const SimConfig& c) {
  std::string sizes;
  for (std::size_t i = 0; i < c.meta_pulse_sizes.size(); ++i) {
    if (i) sizes += ',';
    sizes += std::to_string(c.meta_pulse_sizes[i]);
  }
  return {
      {"params.G", format_double(c.truth.g())},
      {"params.V_E", format_double(c.truth.v_e())},
      {"params.alpha", format_double(c.truth.alpha())},
      {"params.beta", format_double(c.truth.beta())},
      {"params.F", format_double(c.truth.f())},
      {"sim.initial_atoms", format_double(c.initial_atoms)},
      {"sim.loading_rms", format_double(c.loading_rms)},
      {"sim.loss_per_cycle", format_double(c.loss_per_cycle)},
      {"sim.cycles_per_load", std::to_string(c.cycles_per_load)},
      {"sim.repetitions", std::to_string(c.repetitions)},
      {"sim.pulses_per_train", std::to_string(c.pulses_per_train)},
      {"sim.photons_per_pulse", format_double(c.photons_per_pulse)},
      {"sim.meta_pulse_sizes", sizes},
      {"sim.meta_pulses_per_partition", std::to_string(c.meta_pulses_per_partition)},
      {"sim.dispersive_photons", format_double(c.dispersive_photons)},
      {"sim.imaging_rms", format_double(c.imaging_rms)},
      {"sim.seed", std::to_string(c.seed)},
      {"sim.exact_sampling_threshold", std::to_string(c.exact_sampling_threshold)},
      {"noise.shot", on_off(c.noise.shot)},
      {"noise.electronic", on_off(c.noise.electronic)},
      {"noise.light_technical", on_off(c.noise.light_technical)},
      {"noise.atomic_technical", on_off(c.noise.atomic_technical)},
      {"noise.projection", on_off(c.noise.projection)},
  };
}

SimConfig sim_config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  RunConfig cfg;
  cfg.set_many(entries);
  return cfg.sim;
}

std::string config_hash(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [key, value] : canonical_sim_entries(config)) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qnd
