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

#include "ampgate/design.hpp"

#include <cmath>
#include <sstream>

namespace ampgate {
namespace {

void require_regime(double delta, double g) {
  if (!(g >= 0.0)) {
    throw std::invalid_argument("g must be non-negative");
  }
  if (!(std::abs(delta) > g)) {
    std::ostringstream msg;
    msg << "invalid regime: |delta|=" << std::abs(delta) << " <= g=" << g;
    throw InvalidRegimeError(msg.str());
  }
}

}  // namespace

double bogoliubov_r(double delta, double g) {
  require_regime(delta, g);
  // log1p form keeps r accurate when g ≪ |δ|.
  return 0.25 * (std::log1p(g / delta) - std::log1p(-g / delta));
}

double effective_detuning(double delta, double g) {
  require_regime(delta, g);
  return std::sqrt((std::abs(delta) - g) * (std::abs(delta) + g));
}

double gain(double delta, double g, double theta) {
  const double dp = effective_detuning(delta, g);
  return std::sqrt(std::abs((delta + g * std::cos(theta)) / dp));
}

double gain_from_r(double r, double theta) {
  // cosh2r + cosθ sinh2r without the cancellation near θ = π.
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return std::sqrt(std::exp(2 * r) * c * c + std::exp(-2 * r) * s * s);
}

GateSolution solve_gate(double omega0_rabi, double g, double theta,
                        double phi_target, int loops,
                        const SolveOptions& options) {
  if (!(omega0_rabi > 0)) throw std::invalid_argument("omega0_rabi must be > 0");
  if (!(g >= 0)) throw std::invalid_argument("g must be >= 0");
  if (!(phi_target > 0)) throw std::invalid_argument("phi_target must be > 0");
  if (loops < 1) throw std::invalid_argument("loops must be >= 1");

  const double c = std::cos(theta);
  const double rhs = kTwoPi * loops * omega0_rabi * omega0_rabi / phi_target;
  // Unknown x = δ − g > 0 keeps full relative precision when δ is close to g.
  // Residual of δ′³/(δ + g cosθ) = rhs; negative as x → 0⁺, positive for large x.
  auto residual = [&](double x) {
    const double dp2 = x * (x + 2 * g);
    return dp2 * std::sqrt(dp2) / (x + g * (1 + c)) - rhs;
  };

  const double scale = std::max(g, omega0_rabi);
  double lo = 1e-12 * scale;
  double f_lo = residual(lo);
  double hi = std::max(10 * omega0_rabi, 4 * g);
  double f_hi = residual(hi);
  for (int i = 0; f_hi <= 0; ++i) {
    if (i > 200 || !std::isfinite(f_hi)) {
      throw ConvergenceError("solve_gate: could not bracket a root with delta > g");
    }
    lo = hi;
    f_lo = f_hi;
    hi *= 2;
    f_hi = residual(hi);
  }
  if (!(f_lo < 0)) {
    throw ConvergenceError("solve_gate: no sign change above delta = g");
  }

  // Illinois regula falsi, falling back to bisection when the secant point
  // stalls near an endpoint.
  int side = 0;
  double x = lo;
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    double next = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    const double width = hi - lo;
    if (!(next > lo + 0.01 * width && next < hi - 0.01 * width)) {
      next = 0.5 * (lo + hi);
    }
    const double f = residual(next);
    x = next;
    if (f == 0 || width <= options.rel_tol * hi ||
        std::abs(f) <= 1e-15 * rhs) {
      converged = true;
      break;
    }
    if (f < 0) {
      lo = next;
      f_lo = f;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = next;
      f_hi = f;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  if (!converged) {
    throw ConvergenceError("solve_gate: did not converge");
  }

  const double d = g + x;
  GateSolution sol;
  sol.delta = d;
  sol.excess = x;
  sol.delta_prime = std::sqrt(x * (x + 2 * g));
  sol.tau = kTwoPi * loops / sol.delta_prime;
  sol.r = bogoliubov_r(d, g);
  sol.gain = gain(d, g, theta);
  sol.loops = loops;
  sol.phi_target = phi_target;
  return sol;
}

}  // namespace ampgate
