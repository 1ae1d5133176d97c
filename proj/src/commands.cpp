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

#include "qndnoise/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qndnoise/error.hpp"
#include "qndnoise/formats.hpp"

namespace qnd {
namespace {

std::string fixed(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

bool is_variance_table(std::string_view text) {
  return text.substr(0, kVarianceTableMagic.size()) == kVarianceTableMagic;
}

}  // namespace

std::vector<RotationSample> rotation_samples(const Dataset& dataset) {
  std::vector<RotationSample> out;
  out.reserve(dataset.records.size());
  for (const auto& r : dataset.records) {
    if (r.n_atoms_imaging > 0)
      out.push_back({r.dispersive_phi, static_cast<double>(r.n_atoms_imaging)});
  }
  return out;
}

DatasetAnalysis analyze_dataset(const Dataset& dataset, const NaBinning& binning,
                                const FitOptions& options) {
  DatasetAnalysis a;
  a.table = tabulate_variances(dataset, binning);
  a.fit = fit_noise_surface(a.table.points, dataset.config.truth.f(), options);
  const auto samples = rotation_samples(dataset);
  if (samples.size() >= 2) {
    a.dispersive = calibrate_g_dispersive(samples);
    a.consistency = consistency_check(a.fit, *a.dispersive);
  }
  return a;
}

std::string cmd_simulate(const RunConfig& config, const std::string& out_path,
                         unsigned threads) {
  if (out_path.empty())
    throw Error(ErrorCode::kConfig, "simulate needs an output path (--out or io.output)");
  Dataset ds;
  try {
    ds = run_sequence(config.sim, threads);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument)
      throw Error(ErrorCode::kConfig, e.what());
    throw;
  }
  const std::string text = serialize_dataset(ds);
  write_file_atomic(out_path, text);

  std::ostringstream msg;
  msg << "wrote " << ds.records.size() << " trials (" << config.sim.repetitions
      << " repetitions x " << config.sim.cycles_per_load << " cycles) to "
      << out_path << "\n"
      << "seed " << config.sim.seed << ", config_hash " << config_hash(config.sim)
      << "\n";
  return msg.str();
}

std::string cmd_fit(const RunConfig& config, const std::string& in_path,
                    const std::string& out_path) {
  if (in_path.empty())
    throw Error(ErrorCode::kConfig, "fit needs an input path (--input or io.input)");
  if (out_path.empty())
    throw Error(ErrorCode::kConfig, "fit needs an output path (--out or io.output)");
  const std::string text = read_file(in_path);

  FitProvenance prov;
  prov.input = in_path;
  std::vector<VariancePoint> points;
  FitResult fit;
  std::optional<DispersiveCalibration> dispersive;
  std::optional<ConsistencyReport> consistency;
  if (is_variance_table(text)) {
    points = parse_variance_table(text);
    fit = fit_noise_surface(points, config.params_block.f, config.fit);
  } else {
    const Dataset ds = parse_dataset(text);
    prov.seed = ds.config.seed;
    prov.config_hash = config_hash(ds.config);
    auto a = analyze_dataset(ds, config.binning, config.fit);
    prov.dropped_bins = a.table.dropped_bins;
    points = std::move(a.table.points);
    fit = std::move(a.fit);
    dispersive = a.dispersive;
    consistency = a.consistency;
  }

  const auto doc = fit_to_json(fit, points, prov, dispersive, consistency);
  write_file_atomic(out_path, doc.dump(2) + "\n");

  std::ostringstream msg;
  msg.precision(6);
  msg << "G     = " << fit.params.g() << " +- " << fit.sigma_g << "\n"
      << "V_E   = " << fit.params.v_e() << " +- " << fit.sigma_v_e << "\n"
      << "alpha = " << fit.params.alpha() << " +- " << fit.sigma_alpha << "\n"
      << "beta  = " << fit.params.beta() << " +- " << fit.sigma_beta << "\n"
      << "chi2/dof = " << fit.chi_square_per_dof() << " (" << fit.dof
      << " dof, " << fit.iterations << " iterations"
      << (fit.converged ? "" : ", NOT converged") << ")\n";
  if (consistency) {
    msg << "dispersive G = " << consistency->g_dispersive << " +- "
        << consistency->sigma_dispersive << "; z = " << consistency->z_score
        << ", relative " << 100.0 * consistency->relative << "% -> "
        << (consistency->pass() ? "consistent" : "INCONSISTENT") << "\n";
  }
  msg << "wrote " << out_path << "\n";
  return msg.str();
}

std::string cmd_budget(const RunConfig& config, OutputFormat format,
                       const std::string& out_path) {
  const NoiseParams p = config.params();
  const OperatingPoint& pt = config.point;
  const NoiseBudget b = noise_budget(p, pt);
  const double projection_spins = std::sqrt(thermal_variance(pt.n_atoms, p.f()));
  std::optional<double> readout;
  if (pt.n_photons > 0.0) readout = readout_noise_spins(p, pt.n_photons);
  const Crossovers cross = crossover_points(p);

  std::string out;
  if (format == OutputFormat::kJson) {
    nlohmann::json doc;
    doc["schema"] = "qndnoise.budget";
    doc["schema_version"] = 1;
    doc["point"] = {{"n_atoms", pt.n_atoms}, {"n_photons", pt.n_photons}};
    nlohmann::json terms;
    nlohmann::json margins;
    for (NoiseTerm t : kAllTerms) {
      terms[std::string(to_string(t))] = b.term(t);
      if (t == NoiseTerm::kAtomicProjection) continue;
      const auto db = b.db_below_projection(t);
      margins[std::string(to_string(t))] = db ? nlohmann::json(*db) : nlohmann::json(nullptr);
    }
    doc["terms"] = terms;
    doc["total"] = b.total;
    doc["db_below_projection"] = margins;
    doc["readout_noise_spins"] = readout ? nlohmann::json(*readout) : nlohmann::json(nullptr);
    doc["projection_noise_spins"] = projection_spins;
    doc["crossover"] = {
        {"atoms", cross.atoms ? nlohmann::json(*cross.atoms) : nlohmann::json(nullptr)},
        {"photons", cross.photons ? nlohmann::json(*cross.photons) : nlohmann::json(nullptr)}};
    out = doc.dump(2) + "\n";
  } else if (format == OutputFormat::kCsv) {
    out = "quantity,value,db_below_projection\n";
    for (NoiseTerm t : kAllTerms) {
      const auto db = b.db_below_projection(t);
      out += std::string(to_string(t)) + "," + format_double(b.term(t)) + "," +
             (db ? format_double(*db) : std::string()) + "\n";
    }
    out += "total," + format_double(b.total) + ",\n";
    out += "readout_noise_spins," + (readout ? format_double(*readout) : "") + ",\n";
    out += "projection_noise_spins," + format_double(projection_spins) + ",\n";
    out += "crossover_atoms," + (cross.atoms ? format_double(*cross.atoms) : "inf") + ",\n";
    out += "crossover_photons," + (cross.photons ? format_double(*cross.photons) : "inf") + ",\n";
  } else {
    std::ostringstream s;
    s << "noise budget at N_A = " << format_double(pt.n_atoms)
      << ", N_L = " << format_double(pt.n_photons) << "\n";
    s << pad("term", 20) << pad("variance", 20) << "dB below projection\n";
    for (NoiseTerm t : kAllTerms) {
      if (b.term(t) == 0.0) continue;
      const auto db = b.db_below_projection(t);
      s << pad(std::string(to_string(t)), 20) << pad(fixed(b.term(t)), 20)
        << (db ? fixed(*db) : std::string("-")) << "\n";
    }
    s << pad("total", 20) << fixed(b.total) << "\n\n";
    s << pad("readout noise", 20)
      << (readout ? fixed(*readout) + " spins" : std::string("undefined (N_L = 0)"))
      << "\n";
    s << pad("projection noise", 20) << fixed(projection_spins) << " spins\n";
    s << pad("crossover", 20) << "N_A = "
      << (cross.atoms ? fixed(*cross.atoms, 0) : std::string("unbounded"))
      << ", N_L = "
      << (cross.photons ? fixed(*cross.photons, 0) : std::string("unbounded"))
      << "\n";
    out = s.str();
  }
  if (!out_path.empty()) write_file_atomic(out_path, out);
  return out;
}

std::string cmd_report(const RunConfig& config, const std::string& in_path,
                       const std::string& fit_path, const std::string& out_prefix) {
  if (in_path.empty())
    throw Error(ErrorCode::kConfig, "report needs a dataset (--input or io.input)");
  if (fit_path.empty())
    throw Error(ErrorCode::kConfig, "report needs a fit result (io.fit_result)");
  if (out_prefix.empty())
    throw Error(ErrorCode::kConfig, "report needs an output prefix (--out or io.output)");

  std::string dataset_text;
  std::string fit_text;
  try {
    dataset_text = read_file(in_path);
    fit_text = read_file(fit_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("missing input: ") + e.what());
  }
  const Dataset ds = parse_dataset(dataset_text);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(fit_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed results file: ") + e.what());
  }
  const NoiseParams params = params_from_fit_json(doc);
  const auto table = tabulate_variances(ds, config.binning);
  if (table.points.empty())
    throw Error(ErrorCode::kConfig, "dataset has no variance points to report");

  auto nearest = [](const std::vector<VariancePoint>& pts, auto key, double target) {
    double best = key(pts.front());
    for (const auto& p : pts)
      if (std::abs(key(p) - target) < std::abs(best - target)) best = key(p);
    return best;
  };
  const double scan_photons = nearest(
      table.points, [](const VariancePoint& p) { return p.n_photons; },
      config.report_fixed_photons);
  const double scan_atoms = nearest(
      table.points, [](const VariancePoint& p) { return p.n_atoms; },
      config.report_fixed_atoms);

  double chi2 = 0.0;
  auto row = [&](const VariancePoint& p) {
    const NoiseBudget b = noise_budget(params, {p.n_atoms, p.n_photons});
    const double stderr_ = b.total * std::sqrt(2.0 / static_cast<double>(p.m_samples - 1));
    std::string line;
    line += format_double(p.n_atoms) + "," + format_double(p.n_photons) + "," +
            std::to_string(p.m_samples) + "," + format_double(p.variance) + "," +
            format_double(stderr_) + "," + format_double(b.total) + "," +
            format_double(b.atomic_projection) + "," +
            format_double(b.electronic + b.light_shot + b.light_technical) + "\n";
    return line;
  };
  for (const auto& p : table.points) {
    const double model = variance_model(params, {p.n_atoms, p.n_photons});
    const double w = static_cast<double>(p.m_samples - 1) / (2.0 * model * model);
    chi2 += w * (p.variance - model) * (p.variance - model);
  }

  std::vector<VariancePoint> atom_scan;
  std::vector<VariancePoint> photon_scan;
  for (const auto& p : table.points) {
    if (p.n_photons == scan_photons) atom_scan.push_back(p);
    if (p.n_atoms == scan_atoms) photon_scan.push_back(p);
  }
  std::sort(atom_scan.begin(), atom_scan.end(),
            [](const auto& a, const auto& b) { return a.n_atoms < b.n_atoms; });
  std::sort(photon_scan.begin(), photon_scan.end(),
            [](const auto& a, const auto& b) { return a.n_photons < b.n_photons; });

  std::string atoms_csv = std::string(kReportColumns) + "\n";
  for (const auto& p : atom_scan) atoms_csv += row(p);
  std::string photons_csv = std::string(kReportColumns) + "\n";
  for (const auto& p : photon_scan) photons_csv += row(p);

  const std::string atoms_path = out_prefix + "_atom_scan.csv";
  const std::string photons_path = out_prefix + "_photon_scan.csv";
  write_file_atomic(atoms_path, atoms_csv);
  write_file_atomic(photons_path, photons_csv);

  const int n = static_cast<int>(table.points.size());
  const int dof = n - 4;
  std::ostringstream msg;
  msg << "atom scan at N_L = " << format_double(scan_photons) << ": "
      << atom_scan.size() << " rows -> " << atoms_path << "\n"
      << "photon scan at N_A = " << format_double(scan_atoms) << ": "
      << photon_scan.size() << " rows -> " << photons_path << "\n"
      << "chi2/dof of measured vs model = "
      << (dof > 0 ? format_double(chi2 / dof) : std::string("undefined")) << " ("
      << dof << " dof)\n";
  return msg.str();
}

}  // namespace qnd
