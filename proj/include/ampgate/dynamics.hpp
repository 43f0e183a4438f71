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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ampgate/model.hpp"

namespace ampgate {

/// How the phase-noise process enters the Bogoliubov equations.
enum class NoiseMode {
  /// W = √γ η with ⟨W W⟩ = γ δ(t−t′), Stratonovich, no drift. Mean coherence
  /// decays as e^{−γt/2}, matching the phase-damping master equation.
  kCalibrated,
  /// ⟨W W⟩ = 2γ δ(t−t′), no drift: ⟨h⟩ decays as e^{−γt}.
  kCoherence,
  /// The printed equations: drift −γ plus noise √γη with ⟨ηη⟩ = γδ.
  kLiteral,
};

enum class FidelityMeasure {
  /// ⟨ψ_B|ρ_spin|ψ_B⟩ with the motion traced out.
  kTraced,
  /// |⟨ψ_B, 0|Ψ⟩|², motion projected onto the interaction-frame vacuum.
  kGroundProjected,
};

/// Sign relating Im∫α*dα to the geometric phase Φ of the +− branch, chosen so
/// the noiseless solved gate maps |↓↓⟩ onto (|↓↓⟩ + i|↑↑⟩)/√2.
inline constexpr double kGeometricPhaseSign = -1.0;

/// Heating contribution to infidelity per quantum gained during the gate.
inline constexpr double kHeatingPenaltyCoefficient = 0.5;

struct IntegratorOptions {
  bool rwa = true;
  NoiseMode noise_mode = NoiseMode::kCalibrated;
  FidelityMeasure measure = FidelityMeasure::kTraced;
  /// Reference the qubit frame to the mean ac Zeeman shift, so only the
  /// fluctuation δ_ac − δ̄_ac drives the Fock equations.
  bool compensate_zeeman_mean = true;
  int steps_per_loop = 2000;
  /// Steps per parametric drive period outside RWA. At least 20 is enforced;
  /// the terms at 2ω_P need about 100 to keep |u|²−|v|² within 1e−8.
  int steps_per_drive_period = 100;
};

/// Uniform grid 0, dt, 2dt, ... ending exactly at t_end. The last step is
/// shorter when t_end is not a multiple of dt; the noise of a step is tied to
/// its index, so truncating t_end keeps the same noise path.
struct TimeGrid {
  double dt = 0.0;
  double t_end = 0.0;

  std::size_t steps() const;
  double node(std::size_t k) const;
  double step_length(std::size_t k) const;

  /// dt = min(2π/δ′ / steps_per_loop, (2π/ω_P)/steps_per_drive_period when
  /// not in RWA).
  static TimeGrid for_params(const InteractionParams& params, double t_end,
                             const IntegratorOptions& opts);
};

/// Piecewise-constant ac Zeeman shift, resampled every `interval` with the
/// resample clock offset by `clock_offset` relative to t = 0.
struct ZeemanSchedule {
  double interval = 1e-3;
  double clock_offset = 0.0;
  std::vector<double> values;

  double at(double t) const;
  static ZeemanSchedule constant(double value);
};

/// Everything random about one run. Fully determined by (seed, params).
struct NoiseRealization {
  std::uint64_t seed = 0;
  double gamma = 0.0;
  double motional_offset = 0.0;
  /// Unit normals, one per integrator step; missing entries count as zero.
  std::vector<double> dephasing_normals;
  std::optional<ZeemanSchedule> zeeman;
  double zeeman_reference = 0.0;

  /// Noiseless realization.
  static NoiseRealization none();
  /// Deterministic part only: γ set but the noise path held at η ≡ 0.
  static NoiseRealization quiet(double gamma);
  /// Draws a realization covering `steps` integrator steps and `horizon` s.
  static NoiseRealization draw(const NoiseParams& noise, std::uint64_t seed,
                               std::size_t steps, double horizon);

  /// Noise value W (rad/s) acting during step k of nominal length dt.
  double step_noise(std::size_t k, double dt, NoiseMode mode) const;
};

/// Sampled branch dynamics on a TimeGrid.
struct BranchTrajectory {
  std::vector<double> t;
  std::vector<Complex> u;
  std::vector<Complex> v;
  std::vector<Complex> h;
  /// dh/dt at the start and end of each step under that step's noise value.
  std::vector<Complex> hdot_start;
  std::vector<Complex> hdot_end;
  std::vector<Complex> alpha;
  std::vector<double> phi_geo;
  bool zeeman_present = false;
};

/// Integrates the Bogoliubov coefficients u, v from u(0)=1, v(0)=0.
BranchTrajectory integrate_uv(const InteractionParams& params,
                              const NoiseRealization& noise,
                              const TimeGrid& grid,
                              const IntegratorOptions& opts = {});

/// α₊₋(t) = −i∫₀ᵗ Ω₀ h dt′ by endpoint-corrected trapezoidal quadrature.
std::vector<Complex> branch_displacement(const BranchTrajectory& traj,
                                         double omega0_rabi);

/// Φ(t) = kGeometricPhaseSign · Im∫α* dα, accumulated on the same grid.
std::vector<double> geometric_phase(const BranchTrajectory& traj,
                                    std::span<const Complex> alpha,
                                    double omega0_rabi);

/// integrate_uv followed by branch_displacement and geometric_phase.
BranchTrajectory trace_branch(const InteractionParams& params,
                              const NoiseRealization& noise,
                              const TimeGrid& grid,
                              const IntegratorOptions& opts = {});

/// Bell fidelity of the coherent-branch state with displacement α and phase Φ.
double branch_fidelity(Complex alpha, double phi_geo, FidelityMeasure measure);

/// Fidelity at every node of a traced trajectory.
std::vector<double> fidelity_curve(const BranchTrajectory& traj,
                                   FidelityMeasure measure);

/// Fidelity at the final node. Rejects trajectories run with a Zeeman shift.
double fidelity_coherent(const BranchTrajectory& traj, FidelityMeasure measure);

struct FockResult {
  std::vector<double> t;
  std::vector<double> fidelity;
  int truncation = 0;
  /// Final coefficients, row j ∈ {0,1,2} for ψ₁, ψ₂, ψ₃, column k = Fock index.
  Eigen::MatrixXcd coefficients;
  double max_norm_error = 0.0;
  double max_top_population = 0.0;
  bool truncation_warning = false;
};

/// Truncated Fock-space propagation of the ψ₁, ψ₂, ψ₃ amplitudes. u, v are
/// integrated alongside with the same update as integrate_uv, so h(t) follows
/// the same noise path.
FockResult propagate_fock(const InteractionParams& params,
                          const NoiseRealization& noise, const TimeGrid& grid,
                          int truncation, const IntegratorOptions& opts = {});

/// Truncation covering a coherent state of amplitude `max_alpha`: the mean
/// occupation plus four standard deviations, never below 23.
int choose_truncation(double max_alpha, double safety = 1.0);

/// exp(−iΦS²/4) in the z basis; Φ = π/2 maps |↓↓⟩ to (|↓↓⟩ + i|↑↑⟩)/√2.
basis::Mat4 ideal_propagator(double phi);

/// F·(1 − c_h·ṅ·τ), clamped at zero.
double apply_heating_penalty(double fidelity, double heating_rate, double tau,
                             double coefficient = kHeatingPenaltyCoefficient);

/// Writes t_s, re_u, im_u, re_v, im_v, re_alpha, im_alpha, phi_geo.
void write_trajectory_csv(const BranchTrajectory& traj, const std::string& path);

}  // namespace ampgate
