# Copyright 2026 The ampgate Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http:#www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Parametrically amplified Molmer-Sorensen gate simulation.

Frequencies are angular (rad/s) and times are seconds unless a name says
otherwise; ``khz_to_rad`` converts from f/2pi in kHz.
"""

from ._core import (
    BootstrapResult,
    ConfigError,
    ConvergenceError,
    EnsembleConfig,
    EnsembleResult,
    FidelitySample,
    GateOptimum,
    GateSolution,
    InvalidRegimeError,
    QuadSurfaceFit,
    SqueezeFit,
    __version__,
    bogoliubov_r,
    bootstrap_t_est,
    effective_detuning,
    fit_quad_surface,
    fit_ramsey,
    fit_squeeze_param,
    gain,
    khz_to_rad,
    mean_fidelity_at,
    optimize_gate,
    rad_to_khz,
    ramsey_expected,
    run_ensemble,
    run_scenario,
    sideband_signal,
    solve_gate,
    squeezed_thermal_populations,
    squeezed_vacuum_populations,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
