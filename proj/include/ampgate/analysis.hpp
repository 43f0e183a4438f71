// Copyright 2026 The ampgate Authors
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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ampgate/model.hpp"

namespace ampgate {

/// F(x, y) = a0 + a1 (x−a4)² + a2 (y−a5)² + a3 (x−a4)(y−a5), x = t_I (s),
/// y = δ′ (rad/s).
struct QuadSurfaceFit {
  std::array<double, 6> a{};
  /// Covariance of a0..a5, propagated from the linear coefficients.
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Zero();
  double residual_norm = 0.0;
  int n_points = 0;
  /// a1 < 0, a2 < 0 and 4 a1 a2 − a3² > 0.
  bool has_maximum = false;

  double t_est() const { return a[4]; }
  double delta_prime_est() const { return a[5]; }
  double operator()(double x, double y) const;
};

struct SurfaceFitOptions {
  /// Weight points by 1/σ_F² (points with σ_F ≤ 0 get unit weight).
  bool weighted = false;
};

/// Least-squares fit on the expanded quadratic, converted to vertex form.
/// Throws std::invalid_argument for fewer than 6 distinct points or a
/// rank-deficient design. When the quadratic part is singular, a4 and a5 are
/// NaN and has_maximum is false.
QuadSurfaceFit fit_quad_surface(const std::vector<FidelitySample>& samples,
                                const SurfaceFitOptions& options = {});

/// Recomputes δ′ = √(δ² − (g+Δg)²). Invalid samples and samples with
/// |δ| ≤ g+Δg are dropped; their count goes to *dropped when given.
std::vector<FidelitySample> deltas_to_delta_prime(const std::vector<FidelitySample>& samples,
                                                  double g, double delta_g,
                                                  std::size_t* dropped = nullptr);

struct BootstrapOptions {
  int n_resamples = 5000;
  std::uint64_t seed = 1;
  /// Standard deviation of the g calibration, rad/s.
  double sigma_g = 0.0;
  /// Draw Δg per point instead of once per synthetic data set.
  bool per_point_g = false;
  bool weighted = false;
  int jobs = 1;
  /// Resample failures above this fraction abort with ConvergenceError.
  double max_failure_fraction = 0.1;
};

struct BootstrapResult {
  double estimate = 0.0;
  /// Central 68% interval: 16th and 84th percentiles.
  double lower = 0.0;
  double upper = 0.0;
  int n_resamples = 0;
  int failures = 0;
  std::uint64_t seed = 0;
  /// One entry per resample, NaN where the fit failed. Index i used the
  /// sub-seed derive_seed(seed, i).
  std::vector<double> values;
  /// Set when the estimate falls outside [lower, upper].
  bool skewed = false;
};

/// Parametric bootstrap of t̃_est = a4: each resample perturbs g by
/// N(0, σ_g), recomputes every δ′ from the raw δ, perturbs every F by
/// N(0, σ_F) and refits. Fits without an interior maximum count as failures.
BootstrapResult bootstrap_t_est(const std::vector<FidelitySample>& samples, double g,
                                const BootstrapOptions& options = {});

/// Distribution of t0 / t from two bootstraps with aligned resample indices.
BootstrapResult bootstrap_speedup(const BootstrapResult& t0, const BootstrapResult& t);

/// t0 / t_est.
double speedup(double t0, double t_est);

/// Linear-interpolated percentile of the finite entries, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Human-readable fit report.
std::string describe_fit(const QuadSurfaceFit& fit);

}  // namespace ampgate
