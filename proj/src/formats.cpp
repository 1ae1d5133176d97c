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

#include "qndnoise/formats.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qndnoise/config.hpp"
#include "qndnoise/error.hpp"

namespace qnd {
namespace {

class CsvWriter {
 public:
  explicit CsvWriter(std::string& out) : out_(out) {}

  CsvWriter& field(double v) {
    sep();
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out_.append(buf, end);
    return *this;
  }
  CsvWriter& field(std::int64_t v) {
    sep();
    char buf[24];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out_.append(buf, end);
    return *this;
  }
  void end_row() {
    out_ += '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ += ',';
    first_ = false;
  }
  std::string& out_;
  bool first_ = true;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

[[noreturn]] void malformed(int line_no, const std::string& what) {
  throw Error(ErrorCode::kIo,
              "line " + std::to_string(line_no) + ": " + what);
}

double field_double(std::string_view s, int line_no) {
  auto v = parse_double(s);
  if (!v) malformed(line_no, "bad number '" + std::string(s) + "'");
  return *v;
}

std::int64_t field_int(std::string_view s, int line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    malformed(line_no, "bad integer '" + std::string(s) + "'");
  return v;
}

// Iterates the lines of a text buffer, tolerating CRLF.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}
  bool next(std::string_view& line) {
    if (text_.empty()) return false;
    const auto nl = text_.find('\n');
    line = text_.substr(0, nl);
    text_.remove_prefix(nl == std::string_view::npos ? text_.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number_;
    return true;
  }
  int number() const { return number_; }

 private:
  std::string_view text_;
  int number_ = 0;
};

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  out.reserve(ds.records.size() * 180 + 1024);
  out += kDatasetMagic;
  out += '\n';
  out += "# version=" + ds.version + "\n";
  out += "# seed=" + std::to_string(ds.config.seed) + "\n";
  out += "# config_hash=" + config_hash(ds.config) + "\n";
  for (const auto& [key, value] : canonical_sim_entries(ds.config))
    out += "# " + key + "=" + value + "\n";
  out += kDatasetColumns;
  out += '\n';

  CsvWriter w(out);
  for (const auto& r : ds.records) {
    for (const auto& m : r.meta_pulses) {
      w.field(static_cast<std::int64_t>(r.repetition))
          .field(static_cast<std::int64_t>(r.cycle))
          .field(r.n_atoms_true)
          .field(r.n_atoms_imaging)
          .field(r.fz_true)
          .field(r.fz_effective)
          .field(r.dispersive_phi)
          .field(static_cast<std::int64_t>(m.partition))
          .field(static_cast<std::int64_t>(m.index))
          .field(m.n_photons)
          .field(m.s_y)
          .end_row();
    }
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  LineReader lines(text);
  std::string_view line;
  if (!lines.next(line) || line != kDatasetMagic)
    throw Error(ErrorCode::kIo, "not a qndnoise dataset (missing '" +
                                    std::string(kDatasetMagic) + "')");

  Dataset ds;
  std::vector<std::pair<std::string, std::string>> entries;
  std::string expected_hash;
  bool have_columns = false;
  while (lines.next(line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto body = line.substr(2);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(body.substr(0, eq));
      const std::string value(body.substr(eq + 1));
      if (key == "version") ds.version = value;
      else if (key == "config_hash") expected_hash = value;
      else if (key == "seed") continue;  // duplicated in sim.seed
      else entries.emplace_back(key, value);
      continue;
    }
    if (line != kDatasetColumns)
      malformed(lines.number(), "unexpected column header");
    have_columns = true;
    break;
  }
  if (!have_columns) throw Error(ErrorCode::kIo, "dataset has no column header");

  try {
    ds.config = sim_config_from_entries(entries);
  } catch (const Error& e) {
    throw Error(ErrorCode::kIo, std::string("dataset metadata: ") + e.what());
  }
  if (!expected_hash.empty() && expected_hash != config_hash(ds.config))
    throw Error(ErrorCode::kIo, "dataset config_hash does not match its metadata");

  while (lines.next(line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 11)
      malformed(lines.number(), "expected 11 fields, got " + std::to_string(f.size()));
    const int n = lines.number();
    const auto rep = static_cast<std::uint32_t>(field_int(f[0], n));
    const auto cycle = static_cast<std::uint32_t>(field_int(f[1], n));
    if (ds.records.empty() || ds.records.back().repetition != rep ||
        ds.records.back().cycle != cycle) {
      TrialRecord r;
      r.repetition = rep;
      r.cycle = cycle;
      r.n_atoms_true = field_int(f[2], n);
      r.n_atoms_imaging = field_int(f[3], n);
      r.fz_true = field_double(f[4], n);
      r.fz_effective = field_double(f[5], n);
      r.dispersive_phi = field_double(f[6], n);
      ds.records.push_back(std::move(r));
    }
    MetaPulse m;
    m.partition = static_cast<int>(field_int(f[7], n));
    m.index = static_cast<int>(field_int(f[8], n));
    m.n_photons = field_double(f[9], n);
    m.s_y = field_double(f[10], n);
    ds.records.back().meta_pulses.push_back(m);
  }
  return ds;
}

std::string serialize_variance_table(const std::vector<VariancePoint>& points) {
  std::string out;
  out += kVarianceTableMagic;
  out += '\n';
  out += kVarianceTableColumns;
  out += '\n';
  CsvWriter w(out);
  for (const auto& p : points) {
    w.field(p.n_atoms).field(p.n_photons).field(p.variance).field(p.m_samples).end_row();
  }
  return out;
}

std::vector<VariancePoint> parse_variance_table(std::string_view text) {
  LineReader lines(text);
  std::string_view line;
  if (!lines.next(line) || line != kVarianceTableMagic)
    throw Error(ErrorCode::kIo, "not a qndnoise variance table");
  if (!lines.next(line) || line != kVarianceTableColumns)
    malformed(lines.number(), "unexpected column header");
  std::vector<VariancePoint> points;
  while (lines.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_fields(line);
    if (f.size() != 4)
      malformed(lines.number(), "expected 4 fields, got " + std::to_string(f.size()));
    const int n = lines.number();
    points.push_back(VariancePoint{field_double(f[0], n), field_double(f[1], n),
                                   field_double(f[2], n), field_int(f[3], n)});
  }
  return points;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read error on '" + path + "'");
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::kIo, "write error on '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::kIo, "cannot rename '" + tmp + "' to '" + path +
                                    "': " + ec.message());
  }
}

nlohmann::json fit_to_json(const FitResult& fit,
                           const std::vector<VariancePoint>& points,
                           const FitProvenance& provenance,
                           const std::optional<DispersiveCalibration>& dispersive,
                           const std::optional<ConsistencyReport>& consistency) {
  using nlohmann::json;
  json doc;
  doc["schema"] = "qndnoise.fit";
  doc["schema_version"] = kFitSchemaVersion;
  doc["version"] = kVersionTag;

  json source;
  source["input"] = provenance.input;
  source["seed"] = provenance.seed ? json(*provenance.seed) : json(nullptr);
  source["config_hash"] = provenance.config_hash;
  source["dropped_bins"] = provenance.dropped_bins;
  doc["source"] = source;

  const auto& p = fit.params;
  doc["params"] = {{"G", p.g()},         {"V_E", p.v_e()}, {"alpha", p.alpha()},
                   {"beta", p.beta()},   {"F", p.f()},     {"V1", p.v1()}};
  doc["uncertainties"] = {{"G", fit.sigma_g},
                          {"V_E", fit.sigma_v_e},
                          {"alpha", fit.sigma_alpha},
                          {"beta", fit.sigma_beta}};

  std::vector<std::string> names;
  if (fit.fit_shot_term) names.push_back("shot");
  for (const char* n : {"V_E", "alpha", "A", "B"}) names.emplace_back(n);
  json cov = json::array();
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < fit.covariance.cols(); ++j)
      row.push_back(fit.covariance(i, j));
    cov.push_back(row);
  }
  doc["coefficients"] = {
      {"names", names},
      {"values", std::vector<double>(fit.coefficients.data(),
                                     fit.coefficients.data() + fit.coefficients.size())},
      {"covariance", cov}};

  doc["fit"] = {{"chi_square", fit.chi_square},
                {"dof", fit.dof},
                {"chi_square_per_dof", fit.chi_square_per_dof()},
                {"iterations", fit.iterations},
                {"converged", fit.converged},
                {"fit_shot_term", fit.fit_shot_term}};

  json warnings = json::array();
  if (!fit.converged) warnings.push_back("not-converged");
  const Eigen::Index off = fit.fit_shot_term ? 1 : 0;
  if (fit.coefficients(off) < 0.0) warnings.push_back("negative-V_E-clamped");
  if (fit.coefficients(off + 1) < 0.0) warnings.push_back("negative-alpha-clamped");
  if (fit.coefficients(off + 3) < 0.0) warnings.push_back("negative-beta-clamped");
  if (provenance.dropped_bins > 0) warnings.push_back("bins-dropped");
  doc["warnings"] = warnings;

  json rows = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    rows.push_back({{"n_atoms", points[i].n_atoms},
                    {"n_photons", points[i].n_photons},
                    {"variance", points[i].variance},
                    {"m_samples", points[i].m_samples},
                    {"residual", fit.residuals(k)},
                    {"weight", fit.weights(k)}});
  }
  doc["points"] = rows;

  if (dispersive) {
    doc["dispersive"] = {{"G", dispersive->g}, {"sigma", dispersive->sigma}};
  } else {
    doc["dispersive"] = nullptr;
  }
  if (consistency) {
    doc["consistency"] = {{"G_fit", consistency->g_fit},
                          {"sigma_fit", consistency->sigma_fit},
                          {"G_dispersive", consistency->g_dispersive},
                          {"sigma_dispersive", consistency->sigma_dispersive},
                          {"z_score", consistency->z_score},
                          {"relative", consistency->relative},
                          {"pass_statistical", consistency->pass_statistical},
                          {"pass_relative", consistency->pass_relative},
                          {"pass", consistency->pass()}};
  } else {
    doc["consistency"] = nullptr;
  }
  return doc;
}

NoiseParams params_from_fit_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != "qndnoise.fit")
      throw Error(ErrorCode::kConfig, "results file has the wrong schema");
    if (doc.at("schema_version").get<int>() != kFitSchemaVersion)
      throw Error(ErrorCode::kConfig, "unsupported results schema_version");
    const auto& p = doc.at("params");
    return NoiseParams(p.at("G").get<double>(), p.at("V_E").get<double>(),
                       p.at("alpha").get<double>(), p.at("beta").get<double>(),
                       p.at("F").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed results file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string("results file: ") + e.what());
  }
}

}  // namespace qnd
