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

#include "ampgate/model.hpp"

namespace ampgate {

/// r = ¼ ln[(δ+g)/(δ−g)]. Negative for δ < −g.
double bogoliubov_r(double delta, double g);

/// δ′ = √(δ² − g²).
double effective_detuning(double delta, double g);

/// |f(δ,g,θ)| = |(δ + g cosθ)/√(δ²−g²)|^{1/2}, the coupling amplification.
/// For δ < 0 this equals gain(|δ|, g, θ+π).
double gain(double delta, double g, double theta);

/// |f(r,θ)| = √(cosh 2r + cosθ sinh 2r).
double gain_from_r(double r, double theta);

struct SolveOptions {
  double rel_tol = 1e-14;
  int max_iterations = 400;
};

/// Detuning and duration of a K-loop gate accumulating `phi_target`.
///
/// Loop closure τδ′ = 2πK and phase K·2π(Ω₀|f|/δ′)² = Φ reduce to
///   δ′³ / (δ + g cosθ) = 2πKΩ₀² / Φ,
/// which is increasing in δ on (g, ∞). Solved on the δ > g branch.
GateSolution solve_gate(double omega0_rabi, double g, double theta,
                        double phi_target = kPi / 2, int loops = 1,
                        const SolveOptions& options = {});

}  // namespace ampgate
