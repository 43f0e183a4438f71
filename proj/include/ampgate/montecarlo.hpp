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
#include <utility>
#include <vector>

#include "ampgate/dynamics.hpp"
#include "ampgate/model.hpp"

namespace ampgate {

enum class Engine {
  kCoherent,
  kFock,
  /// Fock when a Zeeman shift is configured, coherent otherwise.
  kAuto,
};

struct EnsembleConfig {
  InteractionParams params{1.0, 0.0, 0.0, 2.0};
  NoiseParams noise;
  IntegratorOptions integrator;
  Engine engine = Engine::kAuto;
  int n_runs = 600;
  std::uint64_t seed = 1;
  /// End of the τ grid. Zero means 1.1 loops at the configured δ′.
  double t_max = 0.0;
  /// Fock truncation s. Zero picks choose_truncation from the noiseless path.
  int truncation = 0;
  int jobs = 1;
  int bootstrap_resamples = 1000;

  void validate() const;
  /// Resolves kAuto; throws if a coherent engine is asked to handle Zeeman.
  Engine resolved_engine() const;
  double horizon() const;
};

struct EnsembleResult {
  std::vector<double> t;
  /// Ensemble mean F̄(τ) on the grid.
  std::vector<double> mean_curve;
  std::vector<double> run_best_fidelity;
  std::vector<double> run_best_tau;
  std::vector<std::uint64_t> run_seeds;

  /// Maximum of the mean curve and where it sits.
  double best_tau = 0.0;
  double best_fidelity = 0.0;
  /// Run-to-run spread at best_tau over √n.
  double sigma_f = 0.0;
  /// 16th and 84th percentile of bootstrap-resampled means at best_tau.
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Mean over runs of each run's own optimum.
  double mean_run_optimum = 0.0;

  Engine engine = Engine::kCoherent;
  int truncation = 0;
  bool truncation_warning = false;
  /// True when the mean curve peaks on the last grid node.
  bool optimum_at_edge = false;
  std::vector<std::string> warnings;
};

EnsembleResult run_ensemble(const EnsembleConfig& config);

struct MeanFidelity {
  double fidelity = 0.0;
  double sigma_f = 0.0;
};

/// Ensemble mean fidelity at exactly t = tau, same noise paths as run_ensemble.
MeanFidelity mean_fidelity_at(const EnsembleConfig& config, double tau);

struct OptimalTau {
  double tau = 0.0;
  double fidelity = 0.0;
  EnsembleResult ensemble;
};

/// Locates the maximum of the mean curve and refines it by Brent's method on
/// the exact ensemble mean to `resolution` seconds. Throws ConvergenceError
/// when the maximum lies on the end of the τ range.
OptimalTau find_optimal_tau(const EnsembleConfig& config, double resolution = 0.1e-6);

struct DetuningScan {
  double lo = 0.95;
  double hi = 1.3;
  int points = 15;
  /// Brent refinement of the best δ′ scale between its neighbours.
  bool refine = true;
};

struct GateOptimum {
  /// δ′ / δ′_design at the optimum.
  double scale = 1.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  GateSolution design;
  EnsembleResult ensemble;
  /// (scale, best mean fidelity) for every ensemble evaluated.
  std::vector<std::pair<double, double>> trace;
};

/// Maximizes the ensemble-mean fidelity over gate time and effective detuning
/// around the solve_gate point for config.params.g() and theta(). The δ of
/// config.params is ignored.
GateOptimum optimize_gate(const EnsembleConfig& config, const DetuningScan& scan = {});

struct GridPoint {
  double t_i = 0.0;
  double delta = 0.0;
};

struct GridResult {
  double g = 0.0;
  double theta = 0.0;
  int n_runs = 0;
  std::vector<FidelitySample> samples;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> errors;

  std::size_t failures() const;
};

/// One ensemble per point, each with its own sub-seed. Points with δ ≤ g or
/// a failed integration are kept with valid = false.
GridResult fidelity_grid(const EnsembleConfig& config, const std::vector<GridPoint>& points);

/// g_hz, theta_rad, t_i_us, delta_hz, delta_prime_hz, fidelity, sigma_f, n_runs, seed
void write_grid_csv(const GridResult& grid, const std::string& path);
GridResult read_grid_csv(const std::string& path);

const char* engine_name(Engine engine);
Engine parse_engine(const std::string& name);

}  // namespace ampgate
