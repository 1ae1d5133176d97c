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

#include "qndnoise/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qndnoise/error.hpp"

namespace qnd {
namespace {

constexpr double kMaxCondition = 1e12;
// Variances below one count^2 are clamped when forming weights.
constexpr double kVarianceFloor = 1.0;

double weight_for(double predicted_variance, std::int64_t m) {
  const double v = std::max(predicted_variance, kVarianceFloor);
  return static_cast<double>(m - 1) / (2.0 * v * v);
}

}  // namespace

Eigen::RowVectorXd Design::raw_row(Eigen::Index i) const {
  return basis.row(i).cwiseProduct(scales.transpose());
}

Design build_design(std::span<const VariancePoint> points,
                    const FitOptions& options) {
  const auto n = static_cast<Eigen::Index>(points.size());
  const Eigen::Index shot_cols = options.fit_shot_term ? 1 : 0;
  const Eigen::Index p = 4 + shot_cols;

  Design d;
  d.fit_shot_term = options.fit_shot_term;
  d.response.resize(n);
  d.known.resize(n);
  d.basis.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    if (pt.m_samples < 2)
      throw_invalid("variance point " + std::to_string(i) +
                    " has fewer than 2 samples");
    if (!(pt.variance >= 0.0) || !(pt.n_atoms >= 0.0) || !(pt.n_photons >= 0.0))
      throw_invalid("variance point " + std::to_string(i) +
                    " has a negative or non-finite field");
    const double nl2 = pt.n_photons * pt.n_photons;
    if (options.fit_shot_term) d.basis(i, 0) = pt.n_photons;
    d.basis(i, shot_cols + 0) = 1.0;
    d.basis(i, shot_cols + 1) = nl2;
    d.basis(i, shot_cols + 2) = nl2 * pt.n_atoms;
    d.basis(i, shot_cols + 3) = nl2 * pt.n_atoms * pt.n_atoms;
    d.known(i) = options.fit_shot_term ? 0.0 : pt.n_photons / 4.0;
    d.response(i) = pt.variance - d.known(i);
  }

  d.scales.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = n > 0 ? d.basis.col(j).norm() : 0.0;
    d.scales(j) = norm > 0.0 ? norm : 1.0;
    d.basis.col(j) /= d.scales(j);
  }
  return d;
}

WeightedSolution solve_weighted(const Design& design,
                                const Eigen::VectorXd& weights) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n < p)
    throw Error(EstimationFailure::kIllPosedDesign,
                std::to_string(n) + " variance points for " +
                    std::to_string(p) + " coefficients");
  if (weights.size() != n) throw_invalid("weight vector size mismatch");

  const Eigen::VectorXd sqrt_w = weights.cwiseSqrt();
  Eigen::MatrixXd xw = sqrt_w.asDiagonal() * design.basis;
  Eigen::VectorXd yw = sqrt_w.cwiseProduct(design.response);

  // Re-equilibrate after weighting; the QR sees unit-norm columns.
  Eigen::VectorXd col_scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = xw.col(j).norm();
    col_scale(j) = norm > 0.0 ? norm : 1.0;
    xw.col(j) /= col_scale(j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xw);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double condition =
      smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition))
    throw Error(EstimationFailure::kIllPosedDesign,
                "design condition number " + std::to_string(condition) +
                    " exceeds 1e12");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(xw);
  const Eigen::VectorXd z = qr.solve(yw);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));

  // Undo both column scalings: c_j = z_j / (col_scale_j * scales_j).
  const Eigen::VectorXd total_scale = col_scale.cwiseProduct(design.scales);
  const Eigen::VectorXd inv_scale = total_scale.cwiseInverse();

  WeightedSolution s;
  s.coefficients = z.cwiseProduct(inv_scale);
  s.covariance =
      inv_scale.asDiagonal() * (r_inv * r_inv.transpose()) * inv_scale.asDiagonal();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  s.condition = condition;
  return s;
}

double FitResult::chi_square_per_dof() const {
  return dof > 0 ? chi_square / dof : 0.0;
}

FitResult fit_noise_surface(std::span<const VariancePoint> points, double f,
                            const FitOptions& options) {
  if (points.empty())
    throw Error(EstimationFailure::kIllPosedDesign, "no variance points");
  if (options.max_iterations < 1) throw_invalid("max_iterations must be >= 1");

  const Design design = build_design(points, options);
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  const Eigen::Index a_col = p - 2;
  const Eigen::Index b_col = p - 1;

  if (design.basis.col(a_col).isZero(0.0) && design.basis.col(b_col).isZero(0.0))
    throw Error(EstimationFailure::kAtomicTermUnidentifiable,
                "no variance point has both atoms and photons");

  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i)
    weights(i) = weight_for(points[static_cast<std::size_t>(i)].variance,
                            points[static_cast<std::size_t>(i)].m_samples);

  auto predict = [&](const Eigen::VectorXd& c) {
    Eigen::VectorXd yhat(n);
    for (Eigen::Index i = 0; i < n; ++i)
      yhat(i) = design.raw_row(i).dot(c) + design.known(i);
    return yhat;
  };

  FitResult fit;
  fit.fit_shot_term = options.fit_shot_term;
  WeightedSolution sol;
  Eigen::VectorXd previous;
  for (int it = 1; it <= options.max_iterations; ++it) {
    sol = solve_weighted(design, weights);
    fit.iterations = it;
    fit.weights = weights;

    const Eigen::VectorXd yhat = predict(sol.coefficients);
    for (Eigen::Index i = 0; i < n; ++i)
      weights(i) = weight_for(yhat(i), points[static_cast<std::size_t>(i)].m_samples);

    if (previous.size() == p) {
      double change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double denom =
            std::abs(sol.coefficients(j)) + std::sqrt(sol.covariance(j, j));
        if (denom > 0.0)
          change = std::max(change,
                            std::abs(sol.coefficients(j) - previous(j)) / denom);
      }
      if (change < options.tolerance) {
        fit.converged = true;
        break;
      }
    }
    previous = sol.coefficients;
  }

  fit.coefficients = sol.coefficients;
  fit.covariance = sol.covariance;

  Eigen::VectorXd measured(n);
  for (Eigen::Index i = 0; i < n; ++i)
    measured(i) = points[static_cast<std::size_t>(i)].variance;
  fit.residuals = measured - predict(sol.coefficients);
  fit.chi_square = fit.residuals.cwiseAbs2().dot(fit.weights);
  fit.dof = static_cast<int>(n - p);

  const Eigen::Index off = options.fit_shot_term ? 1 : 0;
  const double v_e = fit.coefficients(off + 0);
  const double alpha = fit.coefficients(off + 1);
  const double a = fit.coefficients(a_col);
  const double b = fit.coefficients(b_col);
  if (!(a > 0.0))
    throw Error(EstimationFailure::kAtomicTermUnidentifiable,
                "fitted projection coefficient A = " + std::to_string(a) +
                    " is not positive");

  const double v1 = per_atom_variance(f);
  const double g = std::sqrt(4.0 * a / v1);
  const double beta = b / a;
  // Technical terms statistically compatible with zero can come out slightly
  // negative; the parameter set is clamped, the raw coefficients are kept.
  fit.params = NoiseParams(g, std::max(v_e, 0.0), std::max(alpha, 0.0),
                           std::max(beta, 0.0), f);

  const double var_a = fit.covariance(a_col, a_col);
  const double var_b = fit.covariance(b_col, b_col);
  const double cov_ab = fit.covariance(a_col, b_col);
  fit.sigma_g = g * std::sqrt(var_a) / (2.0 * a);
  fit.sigma_v_e = std::sqrt(fit.covariance(off, off));
  fit.sigma_alpha = std::sqrt(fit.covariance(off + 1, off + 1));
  const double var_beta = var_b / (a * a) + b * b * var_a / (a * a * a * a) -
                          2.0 * b * cov_ab / (a * a * a);
  fit.sigma_beta = std::sqrt(std::max(var_beta, 0.0));
  return fit;
}

DispersiveCalibration calibrate_g_dispersive(
    std::span<const RotationSample> samples) {
  if (samples.size() < 2)
    throw Error(EstimationFailure::kDegenerateCalibration,
                "need at least 2 rotation samples");
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& s : samples) {
    if (!(s.n_atoms > 0.0)) throw_invalid("rotation sample with n_atoms <= 0");
    sxy += s.phi * s.n_atoms;
    sxx += s.n_atoms * s.n_atoms;
  }
  DispersiveCalibration cal;
  cal.g = sxy / sxx;
  double rss = 0.0;
  for (const auto& s : samples) {
    const double r = s.phi - cal.g * s.n_atoms;
    rss += r * r;
  }
  const double s2 = rss / static_cast<double>(samples.size() - 1);
  cal.sigma = std::sqrt(s2 / sxx);
  return cal;
}

ConsistencyReport consistency_check(double g_fit, double sigma_fit,
                                    const DispersiveCalibration& dispersive) {
  if (!std::isfinite(g_fit) || !std::isfinite(sigma_fit) ||
      !std::isfinite(dispersive.g) || !std::isfinite(dispersive.sigma))
    throw_invalid("consistency check needs finite estimates");
  ConsistencyReport r;
  r.g_fit = g_fit;
  r.sigma_fit = sigma_fit;
  r.g_dispersive = dispersive.g;
  r.sigma_dispersive = dispersive.sigma;
  const double diff = std::abs(g_fit - dispersive.g);
  const double combined = std::hypot(sigma_fit, dispersive.sigma);
  if (diff == 0.0) {
    r.z_score = 0.0;
  } else {
    r.z_score = combined > 0.0 ? diff / combined
                               : std::numeric_limits<double>::infinity();
  }
  if (diff == 0.0) {
    r.relative = 0.0;
  } else {
    r.relative = dispersive.g != 0.0 ? diff / std::abs(dispersive.g)
                                     : std::numeric_limits<double>::infinity();
  }
  r.pass_statistical = r.z_score < kConsistencyZ;
  r.pass_relative = r.relative < kConsistencyRelative;
  return r;
}

ConsistencyReport consistency_check(const FitResult& fit,
                                    const DispersiveCalibration& dispersive) {
  return consistency_check(fit.params.g(), fit.sigma_g, dispersive);
}

}  // namespace qnd
