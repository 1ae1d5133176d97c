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

#pragma once

// Weighted least-squares calibration of the noise model from variance tables.
//
// With the shot term N_L/4 subtracted, the measured variance is linear in
// the coefficients c = (V_E, alpha, A, B) over the basis
// {1, N_L^2, N_L^2 N_A, N_L^2 N_A^2}, where A = G^2 V1 / 4 and B = beta A.
// A sample variance from m Gaussian samples has variance 2 sigma^4/(m-1),
// so rows are weighted by (m-1)/(2 yhat^2) with yhat the predicted total
// variance, iterated until the coefficients stop moving.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qndnoise/model.hpp"
#include "qndnoise/variance_point.hpp"

namespace qnd {

struct FitOptions {
  // Fit the shot coefficient (expected 1/4) as an extra leading column
  // instead of subtracting N_L/4. Diagnostic only.
  bool fit_shot_term = false;
  int max_iterations = 10;
  double tolerance = 1e-6;  // max relative coefficient change
};

struct Design {
  Eigen::VectorXd response;  // y_i
  Eigen::MatrixXd basis;     // columns scaled to unit norm
  Eigen::VectorXd scales;    // original column norms (1 for zero columns)
  Eigen::VectorXd known;     // subtracted known part of each row (N_L/4)
  bool fit_shot_term = false;

  Eigen::Index rows() const { return basis.rows(); }
  Eigen::Index cols() const { return basis.cols(); }
  // Unscaled basis row i.
  Eigen::RowVectorXd raw_row(Eigen::Index i) const;
};

Design build_design(std::span<const VariancePoint> points,
                    const FitOptions& options = {});

// Weighted solution of a design with fixed weights, via Householder QR on
// the row- and column-scaled matrix.
struct WeightedSolution {
  Eigen::VectorXd coefficients;  // unscaled
  Eigen::MatrixXd covariance;    // (X^T W X)^-1, unscaled
  double condition = 0.0;        // of the weighted, column-scaled matrix
};

// Throws ill-posed-design when the weighted design is rank deficient
// (condition number above 1e12) or has fewer rows than columns.
WeightedSolution solve_weighted(const Design& design,
                                const Eigen::VectorXd& weights);

struct FitResult {
  NoiseParams params = NoiseParams::reference_defaults();
  // (V_E, alpha, A, B), or (shot, V_E, alpha, A, B) with fit_shot_term.
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residuals;  // measured minus predicted total variance
  Eigen::VectorXd weights;
  double chi_square = 0.0;
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  bool fit_shot_term = false;

  double sigma_g = 0.0;
  double sigma_v_e = 0.0;
  double sigma_alpha = 0.0;
  double sigma_beta = 0.0;

  double chi_square_per_dof() const;
};

FitResult fit_noise_surface(std::span<const VariancePoint> points,
                            double f = 1.0, const FitOptions& options = {});

struct DispersiveCalibration {
  double g = 0.0;
  double sigma = 0.0;
};

struct RotationSample {
  double phi = 0.0;
  double n_atoms = 0.0;
};

// Least-squares slope of phi against N_A through the origin, with the
// standard error from the residual scatter.
DispersiveCalibration calibrate_g_dispersive(
    std::span<const RotationSample> samples);

struct ConsistencyReport {
  double g_fit = 0.0;
  double sigma_fit = 0.0;
  double g_dispersive = 0.0;
  double sigma_dispersive = 0.0;
  double z_score = 0.0;           // |g1 - g2| / sqrt(s1^2 + s2^2)
  double relative = 0.0;          // |g1 - g2| / g_dispersive
  bool pass_statistical = false;  // z < 3
  bool pass_relative = false;     // relative < 10%
  bool pass() const { return pass_statistical && pass_relative; }
};

inline constexpr double kConsistencyZ = 3.0;
inline constexpr double kConsistencyRelative = 0.10;

ConsistencyReport consistency_check(double g_fit, double sigma_fit,
                                    const DispersiveCalibration& dispersive);
ConsistencyReport consistency_check(const FitResult& fit,
                                    const DispersiveCalibration& dispersive);

}  // namespace qnd
