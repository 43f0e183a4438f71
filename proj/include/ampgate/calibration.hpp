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

#include <cstdint>
#include <string>
#include <vector>

#include "ampgate/model.hpp"

namespace ampgate {

struct Populations {
  std::vector<double> p;
  /// 1 − Σp, the weight beyond n_max.
  double tail = 0.0;
};

/// Closed-form squeezed vacuum number distribution for |ξ| = r.
Populations squeezed_vacuum_populations(double r, int n_max);

/// Bose–Einstein distribution with mean occupation nbar.
Populations thermal_populations(double nbar, int n_max);

/// Number distribution of a squeezed thermal state S(ξ) ρ_th S(ξ)†, from the
/// generating function (α + βz + γz²)^{−1/2} of a zero-mean Gaussian state.
/// Reduces to squeezed_vacuum_populations at nbar = 0.
Populations squeezed_thermal_populations(double r, double nbar, int n_max);

/// Smallest n_max whose squeezed thermal tail is below `tail`.
int population_cutoff(double r, double nbar, double tail);

/// Σₙ P(n) sin²(√(n+1) Ω_sb t / 2) for each t.
std::vector<double> sideband_signal(const std::vector<double>& populations, double omega_sb,
                                    const std::vector<double>& t);

/// n_max with squeezed vacuum tail below 1e−6.
int squeeze_cutoff(double r);

struct SqueezeFitOptions {
  double xi_max = 3.0;
  int scan_points = 61;
};

struct SqueezeFit {
  double xi = 0.0;
  /// |ξ| / duration.
  double g = 0.0;
  double residual = 0.0;
  /// The residual barely depends on |ξ| over the scan.
  bool unidentifiable = false;
};

/// Least-squares |ξ| for a sideband signal taken after a squeeze of the given
/// duration, with Ω_sb and the initial thermal nbar held fixed.
SqueezeFit fit_squeeze_param(const std::vector<double>& t, const std::vector<double>& signal,
                             double omega_sb, double nbar, double duration,
                             const SqueezeFitOptions& options = {});

/// Static qubit-frequency shifts δ_ac ~ N(mean, sigma²), rad/s.
struct RamseyModel {
  double mean = 0.0;
  double sigma = 0.0;
};

/// Two-ion Ramsey populations. Both ions see the same shift; the two π/2
/// pulses compose to a π pulse at t_R = 0, so P(↓↓) starts at 0.
struct RamseyCurves {
  std::vector<double> t;
  std::vector<double> p_down_down;
  std::vector<double> p_up_up;
  std::vector<double> p_mixed;
  std::vector<double> parity;
};

/// Average over n_draws simulated trials with random static shifts.
RamseyCurves ramsey_populations(const RamseyModel& model, const std::vector<double>& t,
                                int n_draws, std::uint64_t seed);

/// The n_draws → ∞ limit of ramsey_populations.
RamseyCurves ramsey_expected(const RamseyModel& model, const std::vector<double>& t);

struct RamseyFit {
  RamseyModel model;
  double mean_error = 0.0;
  double sigma_error = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Least-squares fit of (δ̄_ac, σ_ac) to observed P(↓↓). The guess seeds a
/// frequency scan over [0, 2 guess.mean] (or up to the Nyquist limit when the
/// guess is zero) before Levenberg–Marquardt.
RamseyFit fit_ramsey(const std::vector<double>& t, const std::vector<double>& p_down_down,
                     const RamseyModel& guess);

/// Calibration data as CSV: t_us, p_bright, sigma.
struct CalibrationData {
  std::vector<double> t;
  std::vector<double> p_bright;
  std::vector<double> sigma;
};
void write_calibration_csv(const CalibrationData& data, const std::string& path);
CalibrationData read_calibration_csv(const std::string& path);

}  // namespace ampgate
