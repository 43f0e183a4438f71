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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ampgate/analysis.hpp"
#include "ampgate/calibration.hpp"
#include "ampgate/design.hpp"
#include "ampgate/dynamics.hpp"
#include "ampgate/montecarlo.hpp"
#include "ampgate/scenario.hpp"

namespace py = pybind11;
using namespace ampgate;

namespace {

EnsembleConfig make_config(double omega0_rabi, double g, double theta, double delta, double gamma,
                           double sigma_delta, double zeeman_mean, double zeeman_sigma,
                           double zeeman_interval, int n_runs, std::uint64_t seed, double t_max,
                           const std::string& engine, bool rwa, int jobs, int truncation) {
  EnsembleConfig c;
  c.params = InteractionParams(omega0_rabi, g, theta, delta);
  c.noise.gamma = gamma;
  c.noise.sigma_delta = sigma_delta;
  c.noise.zeeman_mean = zeeman_mean;
  c.noise.zeeman_sigma = zeeman_sigma;
  c.noise.zeeman_interval = zeeman_interval;
  c.n_runs = n_runs;
  c.seed = seed;
  c.t_max = t_max;
  c.engine = parse_engine(engine);
  c.integrator.rwa = rwa;
  c.jobs = jobs;
  c.truncation = truncation;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parametrically amplified Molmer-Sorensen gate simulation";
  m.attr("__version__") = version_string();

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<InvalidRegimeError>(m, "InvalidRegimeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("khz_to_rad", &khz_to_rad);
  m.def("rad_to_khz", &rad_to_khz);

  py::class_<GateSolution>(m, "GateSolution")
      .def_readonly("tau", &GateSolution::tau)
      .def_readonly("delta", &GateSolution::delta)
      .def_readonly("excess", &GateSolution::excess)
      .def_readonly("delta_prime", &GateSolution::delta_prime)
      .def_readonly("r", &GateSolution::r)
      .def_readonly("gain", &GateSolution::gain)
      .def_readonly("loops", &GateSolution::loops)
      .def("__repr__", [](const GateSolution& s) {
        return "GateSolution(tau=" + std::to_string(s.tau) + ", delta=" + std::to_string(s.delta) +
               ", gain=" + std::to_string(s.gain) + ")";
      });

  m.def("solve_gate",
        [](double omega0, double g, double theta, double phi, int loops) {
          return solve_gate(omega0, g, theta, phi, loops);
        },
        py::arg("omega0_rabi"), py::arg("g"), py::arg("theta") = 0.0, py::arg("phi_target") = kPi / 2,
        py::arg("loops") = 1, "Gate detuning and duration; all frequencies in rad/s.");
  m.def("gain", &gain, py::arg("delta"), py::arg("g"), py::arg("theta"));
  m.def("bogoliubov_r", &bogoliubov_r, py::arg("delta"), py::arg("g"));
  m.def("effective_detuning", &effective_detuning, py::arg("delta"), py::arg("g"));

  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init(&make_config), py::kw_only(), py::arg("omega0_rabi"), py::arg("g"),
           py::arg("theta") = 0.0, py::arg("delta"), py::arg("gamma") = 0.0,
           py::arg("sigma_delta") = 0.0, py::arg("zeeman_mean") = 0.0, py::arg("zeeman_sigma") = 0.0,
           py::arg("zeeman_interval") = 1e-3, py::arg("n_runs") = 600, py::arg("seed") = 1,
           py::arg("t_max") = 0.0, py::arg("engine") = "auto", py::arg("rwa") = true,
           py::arg("jobs") = 1, py::arg("truncation") = 0)
      .def_readwrite("n_runs", &EnsembleConfig::n_runs)
      .def_readwrite("seed", &EnsembleConfig::seed)
      .def_readwrite("jobs", &EnsembleConfig::jobs)
      .def_readwrite("t_max", &EnsembleConfig::t_max);

  py::class_<EnsembleResult>(m, "EnsembleResult")
      .def_readonly("t", &EnsembleResult::t)
      .def_readonly("mean_curve", &EnsembleResult::mean_curve)
      .def_readonly("run_best_fidelity", &EnsembleResult::run_best_fidelity)
      .def_readonly("best_tau", &EnsembleResult::best_tau)
      .def_readonly("best_fidelity", &EnsembleResult::best_fidelity)
      .def_readonly("sigma_f", &EnsembleResult::sigma_f)
      .def_readonly("ci_low", &EnsembleResult::ci_low)
      .def_readonly("ci_high", &EnsembleResult::ci_high)
      .def_readonly("mean_run_optimum", &EnsembleResult::mean_run_optimum)
      .def_readonly("truncation", &EnsembleResult::truncation)
      .def_readonly("warnings", &EnsembleResult::warnings)
      .def_property_readonly("engine", [](const EnsembleResult& r) { return engine_name(r.engine); });

  py::class_<GateOptimum>(m, "GateOptimum")
      .def_readonly("scale", &GateOptimum::scale)
      .def_readonly("delta", &GateOptimum::delta)
      .def_readonly("delta_prime", &GateOptimum::delta_prime)
      .def_readonly("design", &GateOptimum::design)
      .def_readonly("ensemble", &GateOptimum::ensemble);

  m.def("run_ensemble", &run_ensemble, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("optimize_gate", [](const EnsembleConfig& c) { return optimize_gate(c); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("mean_fidelity_at",
        [](const EnsembleConfig& c, double tau) {
          const auto r = mean_fidelity_at(c, tau);
          return py::make_tuple(r.fidelity, r.sigma_f);
        },
        py::arg("config"), py::arg("tau"));

  py::class_<FidelitySample>(m, "FidelitySample")
      .def(py::init([](double t_i, double delta, double delta_prime, double fidelity, double sigma_f) {
             return FidelitySample{t_i, delta, delta_prime, fidelity, sigma_f, true};
           }),
           py::arg("t_i"), py::arg("delta"), py::arg("delta_prime"), py::arg("fidelity"),
           py::arg("sigma_f") = 0.0)
      .def_readwrite("t_i", &FidelitySample::t_i)
      .def_readwrite("delta", &FidelitySample::delta)
      .def_readwrite("delta_prime", &FidelitySample::delta_prime)
      .def_readwrite("fidelity", &FidelitySample::fidelity)
      .def_readwrite("sigma_f", &FidelitySample::sigma_f);

  py::class_<QuadSurfaceFit>(m, "QuadSurfaceFit")
      .def_property_readonly("a", [](const QuadSurfaceFit& f) {
        return std::vector<double>(f.a.begin(), f.a.end());
      })
      .def_readonly("covariance", &QuadSurfaceFit::covariance)
      .def_readonly("residual_norm", &QuadSurfaceFit::residual_norm)
      .def_readonly("has_maximum", &QuadSurfaceFit::has_maximum)
      .def_property_readonly("t_est", &QuadSurfaceFit::t_est)
      .def_property_readonly("delta_prime_est", &QuadSurfaceFit::delta_prime_est)
      .def("__call__", &QuadSurfaceFit::operator());
  m.def("fit_quad_surface",
        [](const std::vector<FidelitySample>& s, bool weighted) { return fit_quad_surface(s, {weighted}); },
        py::arg("samples"), py::arg("weighted") = false);

  py::class_<BootstrapResult>(m, "BootstrapResult")
      .def_readonly("estimate", &BootstrapResult::estimate)
      .def_readonly("lower", &BootstrapResult::lower)
      .def_readonly("upper", &BootstrapResult::upper)
      .def_readonly("failures", &BootstrapResult::failures)
      .def_readonly("values", &BootstrapResult::values);
  m.def("bootstrap_t_est",
        [](const std::vector<FidelitySample>& s, double g, int n, std::uint64_t seed, double sigma_g,
           double max_failure_fraction) {
          BootstrapOptions o;
          o.n_resamples = n;
          o.seed = seed;
          o.sigma_g = sigma_g;
          o.max_failure_fraction = max_failure_fraction;
          return bootstrap_t_est(s, g, o);
        },
        py::arg("samples"), py::arg("g"), py::arg("n_resamples") = 5000, py::arg("seed") = 1,
        py::arg("sigma_g") = 0.0, py::arg("max_failure_fraction") = 0.1);

  m.def("squeezed_vacuum_populations", [](double r, int n) { return squeezed_vacuum_populations(r, n).p; },
        py::arg("r"), py::arg("n_max"));
  m.def("squeezed_thermal_populations",
        [](double r, double nbar, int n) { return squeezed_thermal_populations(r, nbar, n).p; },
        py::arg("r"), py::arg("nbar"), py::arg("n_max"));
  m.def("sideband_signal", &sideband_signal, py::arg("populations"), py::arg("omega_sb"), py::arg("t"));
  py::class_<SqueezeFit>(m, "SqueezeFit")
      .def_readonly("xi", &SqueezeFit::xi)
      .def_readonly("g", &SqueezeFit::g)
      .def_readonly("residual", &SqueezeFit::residual)
      .def_readonly("unidentifiable", &SqueezeFit::unidentifiable);
  m.def("fit_squeeze_param",
        [](const std::vector<double>& t, const std::vector<double>& s, double om, double nbar, double d) {
          return fit_squeeze_param(t, s, om, nbar, d);
        },
        py::arg("t"), py::arg("signal"), py::arg("omega_sb"), py::arg("nbar"), py::arg("duration"));
  m.def("ramsey_expected",
        [](double mean, double sigma, const std::vector<double>& t) {
          return ramsey_expected({mean, sigma}, t).p_down_down;
        },
        py::arg("mean"), py::arg("sigma"), py::arg("t"), "Expected P(down, down) versus t_R.");
  m.def("fit_ramsey",
        [](const std::vector<double>& t, const std::vector<double>& p, double mean, double sigma) {
          const auto f = fit_ramsey(t, p, {mean, sigma});
          return py::dict(py::arg("mean") = f.model.mean, py::arg("sigma") = f.model.sigma,
                          py::arg("mean_error") = f.mean_error, py::arg("sigma_error") = f.sigma_error);
        },
        py::arg("t"), py::arg("p_down_down"), py::arg("guess_mean") = 0.0, py::arg("guess_sigma") = 0.0);

  m.def("run_scenario",
        [](const std::string& path, std::optional<std::uint64_t> seed, int jobs, std::string out,
           std::optional<std::string> engine, std::optional<bool> rwa,
           std::optional<std::string> noise_mode, bool quiet) {
          ScenarioOverrides ov;
          ov.seed = seed;
          ov.jobs = jobs;
          ov.out_dir = std::move(out);
          ov.engine = std::move(engine);
          ov.rwa = rwa;
          ov.noise_mode = std::move(noise_mode);
          ov.quiet = quiet;
          ScenarioOutcome o;
          {
            py::gil_scoped_release release;
            o = run_scenario(path, ov);
          }
          return py::dict(py::arg("exit_code") = o.exit_code, py::arg("out_dir") = o.out_dir,
                          py::arg("manifest") = o.manifest_path, py::arg("outputs") = o.outputs,
                          py::arg("failures") = o.failures);
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("jobs") = 1, py::arg("out") = "",
        py::arg("engine") = py::none(), py::arg("rwa") = py::none(), py::arg("noise_mode") = py::none(),
        py::arg("quiet") = true);
}
