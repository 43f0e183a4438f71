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
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ampgate {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Default out-of-phase radial mode frequency, 2π × 5.9 MHz.
inline constexpr double kDefaultModeFrequency = kTwoPi * 5.9e6;

// Internal unit is rad/s. Files and the CLI speak f = ω/2π.
constexpr double hz_to_rad(double hz) { return kTwoPi * hz; }
constexpr double khz_to_rad(double khz) { return kTwoPi * khz * 1e3; }
constexpr double rad_to_hz(double w) { return w / kTwoPi; }
constexpr double rad_to_khz(double w) { return w / kTwoPi * 1e-3; }

/// Raised when |δ| ≤ g, where the normal-mode transformation does not exist.
class InvalidRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by iterative solvers and fits that fail to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coupling constants of the amplified spin-motion Hamiltonian.
///
/// The parametric drive frequency is not a free parameter: it is always
/// 2ω + 2δ and is recomputed from the mode frequency and detuning.
class InteractionParams {
 public:
  InteractionParams(double omega0_rabi, double g, double theta, double delta,
                    double omega_mode = kDefaultModeFrequency);

  double omega0_rabi() const { return omega0_rabi_; }
  double g() const { return g_; }
  double theta() const { return theta_; }
  double delta() const { return delta_; }
  double omega_mode() const { return omega_mode_; }
  double omega_p() const { return 2.0 * omega_mode_ + 2.0 * delta_; }

  /// True when |δ| > g, the domain of the Bogoliubov picture.
  bool amplified_regime() const;
  void require_amplified_regime() const;

  InteractionParams with_delta(double delta) const;
  InteractionParams with_g(double g) const;
  InteractionParams with_theta(double theta) const;

 private:
  double omega0_rabi_;
  double g_;
  double theta_;
  double delta_;
  double omega_mode_;
};

/// Decoherence sources. All rates in rad/s, interval in seconds.
struct NoiseParams {
  double gamma = 0.0;
  double sigma_delta = 0.0;
  double heating_rate = 0.0;  // quanta/s
  double zeeman_mean = 0.0;
  double zeeman_sigma = 0.0;
  double zeeman_interval = 1e-3;

  void validate() const;
  bool has_zeeman() const { return zeeman_mean != 0.0 || zeeman_sigma > 0.0; }
};

struct GateSolution {
  double tau = 0.0;
  double delta = 0.0;
  /// δ − g, kept separately since it can be far below the rounding of δ.
  double excess = 0.0;
  double delta_prime = 0.0;
  double r = 0.0;
  double gain = 1.0;
  int loops = 1;
  double phi_target = kPi / 2;
};

/// One point of a (t_I, δ′) fidelity scan. `delta` keeps the raw detuning so
/// δ′ can be recomputed for a perturbed g.
struct FidelitySample {
  double t_i = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double fidelity = 0.0;
  double sigma_f = 0.0;
  bool valid = true;
};

/// Two-qubit conventions.
///
/// z basis order: |↓↓⟩, |↓↑⟩, |↑↓⟩, |↑↑⟩.
/// x basis order: |++⟩, |+−⟩, |−+⟩, |−−⟩ with |±⟩ = (|↑⟩ ± |↓⟩)/√2.
/// ψ basis order: ψ₀ = (|++⟩−|−−⟩)/√2, ψ₁ = (|++⟩+|−−⟩)/√2,
///                ψ₂ = (|+−⟩+|−+⟩)/√2, ψ₃ = (|+−⟩−|−+⟩)/√2.
namespace basis {

using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;

/// Columns are the x-basis states written in the z basis.
const Mat4& x_in_z();
/// Columns are the ψ-basis states written in the x basis.
const Mat4& psi_in_x();
/// Columns are the ψ-basis states written in the z basis.
const Mat4& psi_in_z();

Vec4 z_to_x(const Vec4& z);
Vec4 x_to_z(const Vec4& x);
Vec4 x_to_psi(const Vec4& x);
Vec4 psi_to_x(const Vec4& psi);

/// Eigenvalues of S = σₓ¹ − σₓ² on (|++⟩, |+−⟩, |−+⟩, |−−⟩).
inline constexpr std::array<double, 4> kSEigenvalues = {0.0, 2.0, -2.0, 0.0};

Vec4 down_down();
Vec4 up_up();
/// Target Bell state (|↓↓⟩ + i|↑↑⟩)/√2 in the z basis.
Vec4 bell_target();

}  // namespace basis

struct InitialDecomposition {
  std::array<Complex, 4> x_branches;  // (++, +−, −+, −−)
  std::array<Complex, 4> psi;         // (ψ₀, ψ₁, ψ₂, ψ₃)
};

/// |↓↓⟩⊗|0⟩ expanded in the S eigenbasis and in the ψ basis.
InitialDecomposition decompose_initial_state();

/// |⟨ψ_B|state⟩|² for a normalized z-basis two-qubit state.
double bell_state_overlap(const basis::Vec4& state);

}  // namespace ampgate
