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

#include "ampgate/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ampgate/design.hpp"
#include "ampgate/rng.hpp"

namespace ampgate {

// ---------------------------------------------------------------- TimeGrid

std::size_t TimeGrid::steps() const {
  if (!(dt > 0) || !(t_end >= 0)) {
    throw std::invalid_argument("TimeGrid needs dt > 0 and t_end >= 0");
  }
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

double TimeGrid::node(std::size_t k) const {
  return k >= steps() ? t_end : static_cast<double>(k) * dt;
}

double TimeGrid::step_length(std::size_t k) const {
  return node(k + 1) - node(k);
}

TimeGrid TimeGrid::for_params(const InteractionParams& params, double t_end,
                              const IntegratorOptions& opts) {
  const double dp = params.g() == 0.0
                        ? std::abs(params.delta())
                        : effective_detuning(params.delta(), params.g());
  double dt = kTwoPi / dp / opts.steps_per_loop;
  if (!opts.rwa) {
    dt = std::min(dt, kTwoPi / params.omega_p() / std::max(20, opts.steps_per_drive_period));
  }
  return {dt, t_end};
}

// ------------------------------------------------------------------- noise

double ZeemanSchedule::at(double t) const {
  if (values.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::max(0.0, std::floor((t + clock_offset) / interval)));
  return values[std::min(idx, values.size() - 1)];
}

ZeemanSchedule ZeemanSchedule::constant(double value) {
  ZeemanSchedule s;
  s.values = {value};
  return s;
}

NoiseRealization NoiseRealization::none() { return {}; }

NoiseRealization NoiseRealization::quiet(double gamma) {
  NoiseRealization n;
  n.gamma = gamma;
  return n;
}

NoiseRealization NoiseRealization::draw(const NoiseParams& noise,
                                        std::uint64_t seed, std::size_t steps,
                                        double horizon) {
  noise.validate();
  NoiseRealization n;
  n.seed = seed;
  n.gamma = noise.gamma;
  std::normal_distribution<double> normal(0.0, 1.0);

  // Static draws and the dephasing path use separate streams so the path is
  // the same for any horizon or Zeeman setting.
  Rng statics(derive_seed(seed, 1));
  n.motional_offset = noise.sigma_delta * normal(statics);
  if (noise.has_zeeman()) {
    ZeemanSchedule z;
    z.interval = noise.zeeman_interval;
    z.clock_offset =
        std::uniform_real_distribution<double>(0.0, z.interval)(statics);
    const auto segments = static_cast<std::size_t>(
                              std::floor((horizon + z.clock_offset) / z.interval)) +
                          1;
    z.values.reserve(segments);
    for (std::size_t i = 0; i < segments; ++i) {
      z.values.push_back(noise.zeeman_mean + noise.zeeman_sigma * normal(statics));
    }
    n.zeeman = std::move(z);
    n.zeeman_reference = noise.zeeman_mean;
  }

  if (noise.gamma > 0) {
    Rng path(derive_seed(seed, 2));
    n.dephasing_normals.resize(steps);
    for (auto& z : n.dephasing_normals) z = normal(path);
  }
  return n;
}

double NoiseRealization::step_noise(std::size_t k, double dt,
                                    NoiseMode mode) const {
  if (gamma <= 0 || k >= dephasing_normals.size()) return 0.0;
  const double z = dephasing_normals[k];
  switch (mode) {
    case NoiseMode::kCalibrated:
      return z * std::sqrt(gamma / dt);
    case NoiseMode::kCoherence:
      return z * std::sqrt(2 * gamma / dt);
    case NoiseMode::kLiteral:
      return z * gamma / std::sqrt(dt);
  }
  return 0.0;
}

// -------------------------------------------------------------- u, v ODEs

namespace {

struct UvRhs {
  double delta;     // δ + motional offset
  double damping;   // −γ drift in literal mode
  Complex pump_u;   // i g e^{iθ}
  Complex pump_v;   // −i g e^{−iθ}
  double g;
  double theta;
  double two_omega_p;
  bool rwa;

  UvRhs(const InteractionParams& p, const NoiseRealization& noise,
        const IntegratorOptions& opts)
      : delta(p.delta() + noise.motional_offset),
        damping(opts.noise_mode == NoiseMode::kLiteral ? noise.gamma : 0.0),
        pump_u(Complex(0, p.g()) * std::polar(1.0, p.theta())),
        pump_v(Complex(0, -p.g()) * std::polar(1.0, -p.theta())),
        g(p.g()),
        theta(p.theta()),
        two_omega_p(2 * p.omega_p()),
        rwa(opts.rwa) {}

  void operator()(double t, Complex u, Complex v, double w, Complex& du,
                  Complex& dv) const {
    const double d = delta + w;
    Complex cu = pump_u;
    Complex cv = pump_v;
    if (!rwa) {
      const Complex rot = std::polar(1.0, -two_omega_p * t - theta);
      cu += Complex(0, g) * rot;
      cv += Complex(0, -g) * std::conj(rot);
    }
    du = Complex(-damping, -d) * u + cu * v;
    dv = Complex(-damping, d) * v + cv * u;
  }
};

void check_step(const InteractionParams& params, const TimeGrid& grid,
                const IntegratorOptions& opts) {
  if (!opts.rwa && grid.dt > kTwoPi / params.omega_p() / 20.0 * (1 + 1e-12)) {
    throw std::invalid_argument(
        "non-RWA integration needs dt <= (2*pi/omega_p)/20");
  }
}

void check_finite(Complex x, double t) {
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
    std::ostringstream msg;
    msg << "non-finite state at t=" << t << " s";
    throw ConvergenceError(msg.str());
  }
}

}  // namespace

BranchTrajectory integrate_uv(const InteractionParams& params,
                              const NoiseRealization& noise,
                              const TimeGrid& grid,
                              const IntegratorOptions& opts) {
  check_step(params, grid, opts);
  const UvRhs rhs(params, noise, opts);
  const std::size_t n = grid.steps();

  BranchTrajectory tr;
  tr.zeeman_present = noise.zeeman.has_value();
  tr.t.resize(n + 1);
  tr.u.resize(n + 1);
  tr.v.resize(n + 1);
  tr.h.resize(n + 1);
  tr.hdot_start.resize(n);
  tr.hdot_end.resize(n);

  Complex u = 1.0, v = 0.0;
  tr.t[0] = 0.0;
  tr.u[0] = u;
  tr.v[0] = v;
  tr.h[0] = u + v;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.node(k);
    const double dt = grid.step_length(k);
    const double w = noise.step_noise(k, grid.dt, opts.noise_mode);
    Complex k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    rhs(t, u, v, w, k1u, k1v);
    rhs(t + dt / 2, u + dt / 2 * k1u, v + dt / 2 * k1v, w, k2u, k2v);
    rhs(t + dt / 2, u + dt / 2 * k2u, v + dt / 2 * k2v, w, k3u, k3v);
    rhs(t + dt, u + dt * k3u, v + dt * k3v, w, k4u, k4v);
    u += dt / 6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += dt / 6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    check_finite(u + v, t + dt);

    Complex eu, ev;
    rhs(t + dt, u, v, w, eu, ev);
    tr.hdot_start[k] = k1u + k1v;
    tr.hdot_end[k] = eu + ev;
    tr.t[k + 1] = grid.node(k + 1);
    tr.u[k + 1] = u;
    tr.v[k + 1] = v;
    tr.h[k + 1] = u + v;
  }
  return tr;
}

std::vector<Complex> branch_displacement(const BranchTrajectory& traj,
                                         double omega0_rabi) {
  const std::size_t n = traj.h.size();
  std::vector<Complex> alpha(n);
  if (n == 0) return alpha;
  const Complex f(0, -omega0_rabi);
  Complex acc = 0.0;
  alpha[0] = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = traj.t[k + 1] - traj.t[k];
    // Trapezoid with the Euler–Maclaurin endpoint correction: O(dt⁵) per step.
    const Complex integral = dt / 2 * (traj.h[k] + traj.h[k + 1]) +
                             dt * dt / 12 * (traj.hdot_start[k] - traj.hdot_end[k]);
    acc += f * integral;
    alpha[k + 1] = acc;
  }
  return alpha;
}

std::vector<double> geometric_phase(const BranchTrajectory& traj,
                                    std::span<const Complex> alpha,
                                    double omega0_rabi) {
  const std::size_t n = alpha.size();
  if (n != traj.h.size()) {
    throw std::invalid_argument("alpha and trajectory lengths differ");
  }
  std::vector<double> phi(n, 0.0);
  const Complex f(0, -omega0_rabi);
  // q = Im(α* α̇) with α̇ = f h; dq/dt = Im(α* f ḣ) since Im|α̇|² = 0.
  auto q = [&](std::size_t k) { return std::imag(std::conj(alpha[k]) * f * traj.h[k]); };
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double dt = traj.t[k + 1] - traj.t[k];
    const double dq0 = std::imag(std::conj(alpha[k]) * f * traj.hdot_start[k]);
    const double dq1 = std::imag(std::conj(alpha[k + 1]) * f * traj.hdot_end[k]);
    acc += dt / 2 * (q(k) + q(k + 1)) + dt * dt / 12 * (dq0 - dq1);
    phi[k + 1] = kGeometricPhaseSign * acc;
  }
  return phi;
}

BranchTrajectory trace_branch(const InteractionParams& params,
                              const NoiseRealization& noise,
                              const TimeGrid& grid,
                              const IntegratorOptions& opts) {
  BranchTrajectory tr = integrate_uv(params, noise, grid, opts);
  tr.alpha = branch_displacement(tr, params.omega0_rabi());
  tr.phi_geo = geometric_phase(tr, tr.alpha, params.omega0_rabi());
  return tr;
}

double branch_fidelity(Complex alpha, double phi_geo, FidelityMeasure measure) {
  // c₊₋ = −½ e^{i s Φ}; the −+ branch carries −α and the same phase.
  const Complex c = -0.5 * std::polar(1.0, kGeometricPhaseSign * phi_geo);
  const double a2 = std::norm(alpha);
  const Complex minus_i_c = Complex(0, -1) * c;
  if (measure == FidelityMeasure::kGroundProjected) {
    return std::norm(0.5 + minus_i_c * std::exp(-a2 / 2));
  }
  return 0.25 + std::norm(c) * (1 + std::exp(-2 * a2)) / 2 +
         minus_i_c.real() * std::exp(-a2 / 2);
}

std::vector<double> fidelity_curve(const BranchTrajectory& traj,
                                   FidelityMeasure measure) {
  if (traj.alpha.size() != traj.t.size() || traj.phi_geo.size() != traj.t.size()) {
    throw std::invalid_argument("trajectory lacks alpha/phi; use trace_branch");
  }
  std::vector<double> out(traj.t.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = branch_fidelity(traj.alpha[k], traj.phi_geo[k], measure);
  }
  return out;
}

double fidelity_coherent(const BranchTrajectory& traj, FidelityMeasure measure) {
  if (traj.zeeman_present) {
    throw std::invalid_argument(
        "coherent-branch fidelity requires [H_z, S] = 0; use the Fock engine");
  }
  if (traj.alpha.empty() || traj.phi_geo.empty()) {
    throw std::invalid_argument("trajectory lacks alpha/phi; use trace_branch");
  }
  return branch_fidelity(traj.alpha.back(), traj.phi_geo.back(), measure);
}

// ------------------------------------------------------------ Fock engine

namespace {

struct FockRhs {
  int levels;  // s + 1
  double omega0;
  std::vector<double> sqrt_k;  // sqrt_k[k] = √k

  explicit FockRhs(int s, double omega0_rabi)
      : levels(s + 1), omega0(omega0_rabi), sqrt_k(s + 2) {
    for (int k = 0; k <= s + 1; ++k) sqrt_k[k] = std::sqrt(static_cast<double>(k));
  }

  // c and out hold ψ₁, ψ₂, ψ₃ blocks of length `levels`.
  void operator()(const Complex* c, Complex h, double zeeman, Complex* out) const {
    const Complex* c1 = c;
    const Complex* c2 = c + levels;
    const Complex* c3 = c + 2 * levels;
    Complex* d1 = out;
    Complex* d2 = out + levels;
    Complex* d3 = out + 2 * levels;
    const Complex hc = std::conj(h);
    const Complex mi_z(0, -zeeman);
    const Complex mi_o(0, -omega0);
    for (int k = 0; k < levels; ++k) {
      Complex s3 = 0.0, s2 = 0.0;
      if (k + 1 < levels) {
        s3 += hc * sqrt_k[k + 1] * c3[k + 1];
        s2 += hc * sqrt_k[k + 1] * c2[k + 1];
      }
      if (k > 0) {
        s3 += h * sqrt_k[k] * c3[k - 1];
        s2 += h * sqrt_k[k] * c2[k - 1];
      }
      d1[k] = mi_z * c2[k];
      d2[k] = mi_z * c1[k] + mi_o * s3;
      d3[k] = mi_o * s2;
    }
  }
};

double fock_fidelity(const std::vector<Complex>& c, int levels,
                     FidelityMeasure measure) {
  const Complex i(0, 1);
  if (measure == FidelityMeasure::kGroundProjected) {
    return 0.5 * std::norm(c[0] - i * c[levels]);
  }
  double f = 0.0;
  for (int k = 0; k < levels; ++k) f += std::norm(c[k] - i * c[levels + k]);
  return 0.5 * f;
}

}  // namespace

FockResult propagate_fock(const InteractionParams& params,
                          const NoiseRealization& noise, const TimeGrid& grid,
                          int truncation, const IntegratorOptions& opts) {
  if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
  check_step(params, grid, opts);
  const UvRhs uv(params, noise, opts);
  const FockRhs fock(truncation, params.omega0_rabi());
  const int levels = truncation + 1;
  const std::size_t dim = 3 * static_cast<std::size_t>(levels);
  const double zref = opts.compensate_zeeman_mean ? noise.zeeman_reference : 0.0;
  auto zeeman = [&](double t) {
    return noise.zeeman ? noise.zeeman->at(t) - zref : 0.0;
  };

  const InitialDecomposition init = decompose_initial_state();
  std::vector<Complex> c(dim, 0.0);
  c[0] = init.psi[1];
  c[levels] = init.psi[2];

  const std::size_t n = grid.steps();
  FockResult res;
  res.truncation = truncation;
  res.t.resize(n + 1);
  res.fidelity.resize(n + 1);
  res.t[0] = 0.0;
  res.fidelity[0] = fock_fidelity(c, levels, opts.measure);

  std::vector<Complex> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  Complex u = 1.0, v = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    const double t = grid.node(step);
    const double dt = grid.step_length(step);
    const double w = noise.step_noise(step, grid.dt, opts.noise_mode);
    // Held at its mid-step value, like the noise, so a switch inside a step
    // does not spoil the order of the scheme.
    const double z = zeeman(t + dt / 2);

    Complex k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    uv(t, u, v, w, k1u, k1v);
    fock(c.data(), u + v, z, k1.data());

    const Complex u2 = u + dt / 2 * k1u, v2 = v + dt / 2 * k1v;
    uv(t + dt / 2, u2, v2, w, k2u, k2v);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = c[i] + dt / 2 * k1[i];
    fock(tmp.data(), u2 + v2, z, k2.data());

    const Complex u3 = u + dt / 2 * k2u, v3 = v + dt / 2 * k2v;
    uv(t + dt / 2, u3, v3, w, k3u, k3v);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = c[i] + dt / 2 * k2[i];
    fock(tmp.data(), u3 + v3, z, k3.data());

    const Complex u4 = u + dt * k3u, v4 = v + dt * k3v;
    uv(t + dt, u4, v4, w, k4u, k4v);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = c[i] + dt * k3[i];
    fock(tmp.data(), u4 + v4, z, k4.data());

    u += dt / 6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += dt / 6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      c[i] += dt / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      norm += std::norm(c[i]);
    }
    check_finite(c[0], t + dt);
    const double top = std::norm(c[truncation]) +
                       std::norm(c[levels + truncation]) +
                       std::norm(c[2 * levels + truncation]);
    res.max_top_population = std::max(res.max_top_population, top);
    res.max_norm_error = std::max(res.max_norm_error, std::abs(norm - 1.0));
    res.t[step + 1] = grid.node(step + 1);
    res.fidelity[step + 1] = fock_fidelity(c, levels, opts.measure);
  }
  res.truncation_warning = res.max_top_population > 1e-6;
  res.coefficients.resize(3, levels);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < levels; ++k) res.coefficients(j, k) = c[j * levels + k];
  }
  return res;
}

int choose_truncation(double max_alpha, double safety) {
  const double nbar = max_alpha * max_alpha;
  const double span = (nbar + 4 * std::abs(max_alpha)) * safety;
  return std::max(23, static_cast<int>(std::ceil(span)) + 1);
}

basis::Mat4 ideal_propagator(double phi) {
  // Diagonal in the S eigenbasis with S² = (0, 4, 4, 0).
  basis::Mat4 diag = basis::Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    const double s2 = basis::kSEigenvalues[i] * basis::kSEigenvalues[i];
    diag(i, i) = std::polar(1.0, kGeometricPhaseSign * phi * s2 / 4);
  }
  return basis::x_in_z() * diag * basis::x_in_z().adjoint();
}

double apply_heating_penalty(double fidelity, double heating_rate, double tau,
                             double coefficient) {
  if (fidelity < 0 || fidelity > 1 + 1e-12) {
    throw std::invalid_argument("fidelity must lie in [0, 1]");
  }
  const double p = std::clamp(coefficient * heating_rate * tau, 0.0, 1.0);
  return fidelity * (1 - p);
}

void write_trajectory_csv(const BranchTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "t_s,re_u,im_u,re_v,im_v,re_alpha,im_alpha,phi_geo\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const Complex a = k < traj.alpha.size() ? traj.alpha[k] : Complex{};
    const double phi = k < traj.phi_geo.size() ? traj.phi_geo[k] : 0.0;
    out << traj.t[k] << ',' << traj.u[k].real() << ',' << traj.u[k].imag() << ','
        << traj.v[k].real() << ',' << traj.v[k].imag() << ',' << a.real() << ','
        << a.imag() << ',' << phi << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ampgate
