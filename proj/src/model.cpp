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

#include "ampgate/model.hpp"

#include <cmath>
#include <sstream>

namespace ampgate {

InteractionParams::InteractionParams(double omega0_rabi, double g, double theta,
                                     double delta, double omega_mode)
    : omega0_rabi_(omega0_rabi),
      g_(g),
      theta_(theta),
      delta_(delta),
      omega_mode_(omega_mode) {
  if (!(omega0_rabi > 0.0)) {
    throw std::invalid_argument("omega0_rabi must be positive");
  }
  if (!(g >= 0.0)) {
    throw std::invalid_argument("parametric coupling g must be non-negative");
  }
  if (!(omega_mode > 0.0)) {
    throw std::invalid_argument("mode frequency must be positive");
  }
  if (!std::isfinite(theta) || !std::isfinite(delta)) {
    throw std::invalid_argument("theta and delta must be finite");
  }
}

bool InteractionParams::amplified_regime() const {
  return std::abs(delta_) > g_;
}

void InteractionParams::require_amplified_regime() const {
  if (!amplified_regime()) {
    std::ostringstream msg;
    msg << "|delta| must exceed g (delta=" << delta_ << " rad/s, g=" << g_
        << " rad/s)";
    throw InvalidRegimeError(msg.str());
  }
}

InteractionParams InteractionParams::with_delta(double delta) const {
  return {omega0_rabi_, g_, theta_, delta, omega_mode_};
}

InteractionParams InteractionParams::with_g(double g) const {
  return {omega0_rabi_, g, theta_, delta_, omega_mode_};
}

InteractionParams InteractionParams::with_theta(double theta) const {
  return {omega0_rabi_, g_, theta, delta_, omega_mode_};
}

void NoiseParams::validate() const {
  if (gamma < 0 || sigma_delta < 0 || heating_rate < 0 || zeeman_sigma < 0 ||
      zeeman_mean < 0) {
    throw std::invalid_argument("noise parameters must be non-negative");
  }
  if (!(zeeman_interval > 0)) {
    throw std::invalid_argument("zeeman_interval must be positive");
  }
}

namespace basis {
namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Mat4 make_x_in_z() {
  // Single qubit, order (↓, ↑): |+⟩ = (1, 1)/√2, |−⟩ = (−1, 1)/√2.
  Eigen::Vector2cd plus(kInvSqrt2, kInvSqrt2);
  Eigen::Vector2cd minus(-kInvSqrt2, kInvSqrt2);
  auto kron = [](const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
    Vec4 out;
    out << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return out;
  };
  Mat4 m;
  m.col(0) = kron(plus, plus);
  m.col(1) = kron(plus, minus);
  m.col(2) = kron(minus, plus);
  m.col(3) = kron(minus, minus);
  return m;
}

Mat4 make_psi_in_x() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = kInvSqrt2;
  m(3, 0) = -kInvSqrt2;
  m(0, 1) = kInvSqrt2;
  m(3, 1) = kInvSqrt2;
  m(1, 2) = kInvSqrt2;
  m(2, 2) = kInvSqrt2;
  m(1, 3) = kInvSqrt2;
  m(2, 3) = -kInvSqrt2;
  return m;
}

}  // namespace

const Mat4& x_in_z() {
  static const Mat4 m = make_x_in_z();
  return m;
}

const Mat4& psi_in_x() {
  static const Mat4 m = make_psi_in_x();
  return m;
}

const Mat4& psi_in_z() {
  static const Mat4 m = x_in_z() * psi_in_x();
  return m;
}

Vec4 z_to_x(const Vec4& z) { return x_in_z().adjoint() * z; }
Vec4 x_to_z(const Vec4& x) { return x_in_z() * x; }
Vec4 x_to_psi(const Vec4& x) { return psi_in_x().adjoint() * x; }
Vec4 psi_to_x(const Vec4& psi) { return psi_in_x() * psi; }

Vec4 down_down() { return Vec4(1, 0, 0, 0); }
Vec4 up_up() { return Vec4(0, 0, 0, 1); }

Vec4 bell_target() {
  return (down_down() + Complex(0, 1) * up_up()) * kInvSqrt2;
}

}  // namespace basis

InitialDecomposition decompose_initial_state() {
  const basis::Vec4 x = basis::z_to_x(basis::down_down());
  const basis::Vec4 psi = basis::x_to_psi(x);
  InitialDecomposition out;
  for (int i = 0; i < 4; ++i) {
    out.x_branches[i] = x(i);
    out.psi[i] = psi(i);
  }
  return out;
}

double bell_state_overlap(const basis::Vec4& state) {
  if (std::abs(state.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("two-qubit state is not normalized");
  }
  return std::norm(basis::bell_target().dot(state));
}

}  // namespace ampgate
