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

// Acceptance checks. Each run prints detail lines followed by exactly one
// "PASS criterion N" or "FAIL criterion N" line; the exit status matches.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ampgate/analysis.hpp"
#include "ampgate/calibration.hpp"
#include "ampgate/design.hpp"
#include "ampgate/dynamics.hpp"
#include "ampgate/montecarlo.hpp"
#include "ampgate/rng.hpp"
#include "ampgate/scenario.hpp"

using namespace ampgate;

namespace {

const double kOmega0 = khz_to_rad(1.46);

class Report {
 public:
  explicit Report(int criterion) : criterion_(criterion) {}

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    std::printf("  [%s] %s\n", ok ? "ok" : "FAILED", buf);
    std::fflush(stdout);
    all_ &= ok;
  }

  void note(const std::string& s) {
    std::printf("  %s\n", s.c_str());
    std::fflush(stdout);
  }

  int finish(const std::string& title) const {
    std::printf("%s criterion %d: %s\n", all_ ? "PASS" : "FAIL", criterion_, title.c_str());
    return all_ ? 0 : 1;
  }

 private:
  int criterion_;
  bool all_ = true;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

InteractionParams gate_params(double g, double theta) {
  const auto s = solve_gate(kOmega0, g, theta);
  return InteractionParams(kOmega0, g, theta, s.delta);
}

int criterion1() {
  Report r(1);
  const double g = khz_to_rad(49.7);
  auto s = solve_gate(kOmega0, g, 0.0, kPi / 2);
  std::vector<double> times;
  for (int i = 0; i < 200; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    s = solve_gate(kOmega0, g, 0.0, kPi / 2);
    times.push_back(seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  const double tau_ref = kPi / (s.gain * kOmega0);
  r.check(std::abs(s.gain - 3.25) <= 0.01, "G = %.5f (3.25 +- 0.01)", s.gain);
  r.check(std::abs(s.tau / tau_ref - 1) < 1e-3, "tau = %.4f us, pi/(G Omega0) = %.4f us", s.tau * 1e6,
          tau_ref * 1e6);
  // Median, so a preempted call does not decide the outcome.
  r.check(times[100] < 1e-3, "runtime: median %.1f us (< 1 ms), slowest of 200 %.1f us", times[100] * 1e6,
          times.back() * 1e6);
  return r.finish("gain formula at g/2pi = 49.7 kHz");
}

int criterion2() {
  Report r(2);
  const auto s = solve_gate(kOmega0, 0.0, 0.0);
  r.check(std::abs(s.delta / (2 * kOmega0) - 1) < 1e-12, "delta = %.9f kHz (2 Omega0 = %.9f kHz)",
          rad_to_khz(s.delta), rad_to_khz(2 * kOmega0));
  r.check(std::abs(s.tau / 342.5e-6 - 1) < 1e-3, "tau = %.4f us (342.5 us +- 0.1%%)", s.tau * 1e6);
  EnsembleConfig c;
  c.params = InteractionParams(kOmega0, 0.0, 0.0, s.delta);
  c.engine = Engine::kCoherent;
  c.n_runs = 1;
  const auto m = mean_fidelity_at(c, s.tau);
  r.check(std::abs(m.fidelity - 1) < 1e-6, "noiseless coherent fidelity = %.12f", m.fidelity);
  return r.finish("unamplified gate");
}

// Max over the grid of |F_fock - F_coherent| on one shared noise path.
struct OracleDiff {
  double diff = 0.0;
  double max_alpha = 0.0;
  std::string error;
};

OracleDiff oracle_diff(const InteractionParams& p, double tau, const NoiseParams& np) {
  OracleDiff out;
  const TimeGrid grid = TimeGrid::for_params(p, tau, {});
  const auto noise = NoiseRealization::draw(np, 4242, grid.steps(), grid.t_end);
  const auto tr = trace_branch(p, noise, grid);
  for (auto a : tr.alpha) out.max_alpha = std::max(out.max_alpha, std::abs(a));
  const auto coherent = fidelity_curve(tr, FidelityMeasure::kTraced);
  try {
    const auto fock = propagate_fock(p, noise, grid, 23);
    for (std::size_t k = 0; k < fock.fidelity.size(); ++k) {
      out.diff = std::max(out.diff, std::abs(fock.fidelity[k] - coherent[k]));
    }
  } catch (const std::exception& e) {
    out.diff = INFINITY;
    out.error = e.what();
  }
  return out;
}

int criterion3() {
  Report r(3);
  const auto t0 = std::chrono::steady_clock::now();
  // θ is applied to the gate designed at θ = 0, the fixed-(t_I, δ) setting of the phase scan.
  r.note("gate: delta and tau from solve_gate(g, theta = 0), drive phase theta");
  for (bool noisy : {false, true}) {
    NoiseParams np;
    if (noisy) np.gamma = hz_to_rad(5.2);
    for (double gk : {0.0, 12.4, 49.7}) {
      const auto s = solve_gate(kOmega0, khz_to_rad(gk), 0.0);
      for (double theta : {0.0, kPi / 4, kPi}) {
        const InteractionParams p(kOmega0, khz_to_rad(gk), theta, s.delta);
        const auto d = oracle_diff(p, s.tau, np);
        r.check(d.diff < 1e-3, "%s g/2pi=%4.1f kHz theta=%.4f max|alpha|=%.2f: max |F_fock - F_coherent| = %.2e",
                noisy ? "gamma" : "clean", gk, theta, d.max_alpha, d.diff);
      }
    }
  }
  const double el = seconds_since(t0);
  r.check(el < 60, "runtime %.1f s (< 60 s)", el);

  // Not scored: gates re-solved at each theta. Near theta = pi the loop is
  // de-amplified, r grows past 2 and s = 23 cannot hold the state.
  r.note("for reference, gates re-solved at each theta (noiseless, not scored):");
  for (double gk : {12.4, 49.7}) {
    for (double theta : {kPi / 4, kPi}) {
      const auto s = solve_gate(kOmega0, khz_to_rad(gk), theta);
      const auto d = oracle_diff(InteractionParams(kOmega0, khz_to_rad(gk), theta, s.delta), s.tau, {});
      char buf[256];
      std::snprintf(buf, sizeof buf, "  g/2pi=%4.1f theta=%.4f r=%.2f max|alpha|=%.2f: %s", gk, theta, s.r,
                    d.max_alpha, d.error.empty() ? ("diff " + std::to_string(d.diff)).c_str() : d.error.c_str());
      r.note(buf);
    }
  }
  return r.finish("coherent and Fock engines agree");
}

EnsembleConfig noisy_config(double gk, bool zeeman, std::uint64_t seed) {
  EnsembleConfig c;
  c.params = InteractionParams(kOmega0, khz_to_rad(gk), 0.0, khz_to_rad(gk + 10));
  c.noise.gamma = hz_to_rad(5.2);
  c.noise.sigma_delta = hz_to_rad(100);
  if (zeeman) {
    c.noise.zeeman_mean = khz_to_rad(4.59);
    c.noise.zeeman_sigma = khz_to_rad(0.47);
  }
  c.n_runs = 600;
  c.seed = seed;
  return c;
}

int criterion4() {
  Report r(4);
  const auto t0 = std::chrono::steady_clock::now();
  const auto lo = optimize_gate(noisy_config(0.0, false, 2024));
  const auto hi = optimize_gate(noisy_config(49.7, false, 2024));
  const auto& a = lo.ensemble;
  const auto& b = hi.ensemble;
  r.note("estimator: max over (tau, delta') of the 600-run mean fidelity");
  r.check(a.best_fidelity >= 0.95 && a.best_fidelity <= 0.99,
          "g = 0:        F = %.4f +- %.4f (band [0.95, 0.99]), tau* = %.2f us", a.best_fidelity, a.sigma_f,
          a.best_tau * 1e6);
  r.check(b.best_fidelity >= 0.83 && b.best_fidelity <= 0.89,
          "g/2pi = 49.7: F = %.4f +- %.4f (band [0.83, 0.89]; margin to lower edge %.1f sigma)",
          b.best_fidelity, b.sigma_f, (b.best_fidelity - 0.83) / b.sigma_f);
  r.check(b.best_tau >= 80e-6 && b.best_tau <= 95e-6, "g/2pi = 49.7: tau* = %.2f us (band [80, 95] us)",
          b.best_tau * 1e6);
  r.note("mean of per-run optima: g=0 " + std::to_string(a.mean_run_optimum) + ", g=49.7 " +
         std::to_string(b.mean_run_optimum));
  const double el = seconds_since(t0);
  r.check(el < 600, "runtime %.1f s (< 600 s)", el);
  return r.finish("noise-matched fidelities");
}

int criterion5() {
  Report r(5);
  const auto t0 = std::chrono::steady_clock::now();
  const auto lo = optimize_gate(noisy_config(0.0, true, 2024));
  const auto hi = optimize_gate(noisy_config(12.1, true, 2024));
  const auto& a = lo.ensemble;
  const auto& b = hi.ensemble;
  r.note(std::string("engine ") + engine_name(a.engine) + ", truncation " + std::to_string(a.truncation) +
         " / " + std::to_string(b.truncation));
  r.check(a.best_fidelity >= 0.74 && a.best_fidelity <= 0.81, "g = 0:        F = %.4f +- %.4f (band [0.74, 0.81])",
          a.best_fidelity, a.sigma_f);
  r.check(b.best_fidelity >= 0.88 && b.best_fidelity <= 0.94, "g/2pi = 12.1: F = %.4f +- %.4f (band [0.88, 0.94])",
          b.best_fidelity, b.sigma_f);
  const double gap = b.best_fidelity - a.best_fidelity;
  const double sg = std::hypot(a.sigma_f, b.sigma_f);
  r.check(gap > 2 * sg, "amplified exceeds unamplified by %.4f = %.1f sigma (> 2)", gap, gap / sg);
  r.note("runtime " + std::to_string(seconds_since(t0)) + " s");
  return r.finish("robustness to ac Zeeman dephasing");
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

int criterion6() {
  Report r(6);
  const double g = khz_to_rad(12.4);
  const double tau0 = solve_gate(kOmega0, g, 0.0).tau;
  double worst = 0.0, worst_at = 0.0;
  for (int i = -20; i <= 20; ++i) {
    const double x = 0.005 * i;
    const double dev = std::abs(solve_gate(kOmega0, g, kTwoPi * x).tau / tau0 - 1);
    if (dev > worst) {
      worst = dev;
      worst_at = x;
    }
  }
  double edge = 0.0;
  for (double x = 0.0; x <= 0.1; x += 1e-4) {
    if (std::abs(solve_gate(kOmega0, g, kTwoPi * x).tau / tau0 - 1) < 0.02) edge = x;
  }
  r.check(worst < 0.02, "max |tau(theta)/tau(0) - 1| over |theta|/2pi <= 0.1 is %.4f at theta/2pi = %+.3f (< 0.02)",
          worst, worst_at);
  r.note("the 2% bound holds up to |theta|/2pi = " + std::to_string(edge));
  const double ratio = solve_gate(kOmega0, g, kTwoPi * 0.39).tau / tau0;
  r.check(ratio > 1.3, "tau(0.39)/tau(0) = %.4f (> 1.3)", ratio);

  // Fidelity versus theta at the theta = 0 optimum, through the scenario runner.
  const auto dir = std::filesystem::temp_directory_path() / "ampgate_acceptance_6";
  std::filesystem::remove_all(dir);
  ScenarioOverrides ov;
  ov.out_dir = dir.string();
  ov.quiet = true;
  const auto out = run_scenario_text(R"(
name = "fidelity_vs_theta"
kind = "fidelity_vs_theta"
seed = 32
[interaction]
omega0_rabi_khz = 1.46
g_khz = 12.4
[noise]
gamma_hz = 5.2
sigma_delta_hz = 100
[ensemble]
n_runs = 600
[sweep]
theta_over_2pi = [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
)",
                                     "acceptance", ov);
  r.check(out.exit_code == 0, "fidelity_vs_theta scenario exit code %d", out.exit_code);
  const auto rows = read_csv(dir / "fidelity_vs_theta.csv");
  std::vector<double> th, f, s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    th.push_back(std::stod(rows[i][0]));
    f.push_back(std::stod(rows[i][1]));
    s.push_back(std::stod(rows[i][3]) - std::stod(rows[i][1]));
  }
  const std::size_t n = f.size();
  double worst_z = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double z = std::abs(f[i] - f[n - 1 - i]) / std::hypot(s[i], s[n - 1 - i]);
    worst_z = std::max(worst_z, z);
  }
  r.check(worst_z < 3.0, "symmetry: worst |F(theta) - F(-theta)| = %.2f sigma (< 3)", worst_z);
  const auto imin = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
  const double at_pi = std::min(f.front(), f.back());
  r.check(std::abs(std::abs(th[imin]) - 0.5) < 1e-9 || at_pi - f[imin] <= 3 * s[imin],
          "minimum F = %.4f at theta/2pi = %+.2f (F at pi: %.4f)", f[imin], th[imin], f.back());
  return r.finish("phase sensitivity");
}

// Synthetic (t_I, delta) data on a known quadratic in (t_I, delta'_true). The
// analyst sees a g that is off by one draw of the calibration error.
struct SyntheticSurface {
  double g = khz_to_rad(25);
  double sigma_g = khz_to_rad(0.6);
  double t0 = 88e-6, y0 = khz_to_rad(14);
  double wx = 10e-6, wy = khz_to_rad(1.0);
  double sigma_f = 0.01;

  std::vector<FidelitySample> draw(std::uint64_t seed) const {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const double g_true = g + sigma_g * normal(rng);
    std::vector<FidelitySample> out;
    for (int i = -2; i <= 2; ++i) {
      for (int j = -2; j <= 2; ++j) {
        FidelitySample s;
        s.t_i = t0 + 1e-6 + 5e-6 * i;
        const double yp = y0 + khz_to_rad(0.2) + khz_to_rad(0.7) * j;
        s.delta = std::sqrt(yp * yp + g_true * g_true);
        const double u = (s.t_i - t0) / wx, w = (yp - y0) / wy;
        s.fidelity = 0.86 - 0.08 * u * u - 0.06 * w * w + 0.02 * u * w + sigma_f * normal(rng);
        s.sigma_f = sigma_f;
        s.delta_prime = yp;
        out.push_back(s);
      }
    }
    return out;
  }
};

int criterion7() {
  Report r(7);
  // Symplectic norm at γ = 0, in and out of RWA.
  for (bool rwa : {true, false}) {
    double worst = 0.0;
    for (double gk : {0.0, 12.4, 49.7}) {
      const auto p = gate_params(khz_to_rad(gk), 0.0);
      IntegratorOptions o;
      o.rwa = rwa;
      const auto s = solve_gate(kOmega0, p.g(), 0.0);
      const auto tr = integrate_uv(p, NoiseRealization::none(), TimeGrid::for_params(p, s.tau, o), o);
      for (std::size_t k = 0; k < tr.u.size(); ++k) {
        worst = std::max(worst, std::abs(std::norm(tr.u[k]) - std::norm(tr.v[k]) - 1));
      }
    }
    r.check(worst < 1e-8, "symplectic norm (%s): max ||u|^2 - |v|^2 - 1| = %.2e", rwa ? "RWA" : "non-RWA", worst);
  }
  // Fock norm with noise and ac Zeeman.
  {
    NoiseParams np;
    np.gamma = hz_to_rad(5.2);
    np.sigma_delta = hz_to_rad(100);
    np.zeeman_mean = khz_to_rad(4.59);
    np.zeeman_sigma = khz_to_rad(0.47);
    np.zeeman_interval = 50e-6;
    double worst = 0.0;
    for (double gk : {0.0, 12.1}) {
      const auto p = gate_params(khz_to_rad(gk), 0.0);
      const auto s = solve_gate(kOmega0, p.g(), 0.0);
      const TimeGrid grid = TimeGrid::for_params(p, s.tau, {});
      const auto noise = NoiseRealization::draw(np, 17, grid.steps(), grid.t_end);
      worst = std::max(worst, propagate_fock(p, noise, grid, 30).max_norm_error);
    }
    r.check(worst < 1e-8, "Fock norm conservation: max error %.2e", worst);
  }
  // Loop closure and quarter-turn phase at solved parameters.
  {
    double worst = 0.0;
    for (double gk : {0.0, 12.4, 25.0, 49.7}) {
      for (double th : {0.0, kPi / 4, kPi / 2, kPi}) {
        const auto p = gate_params(khz_to_rad(gk), th);
        const auto s = solve_gate(kOmega0, p.g(), th);
        const auto tr = trace_branch(p, NoiseRealization::none(), TimeGrid{s.tau / 4000, s.tau});
        double m = 0.0;
        for (auto a : tr.alpha) m = std::max(m, std::abs(a));
        worst = std::max(worst, std::abs(tr.alpha.back()) / m);
      }
    }
    r.check(worst < 1e-6, "loop closure: max |alpha(tau)| / max|alpha| = %.2e over 16 gates", worst);
  }
  // Geometric phase at g = 0 for detunings that are not the gate solution.
  {
    double worst = 0.0;
    for (double ratio : {1.3, 2.0, 3.7}) {
      const double delta = ratio * kOmega0;
      InteractionParams p(kOmega0, 0.0, 0.0, delta);
      const double period = kTwoPi / delta;
      const auto tr = trace_branch(p, NoiseRealization::none(), TimeGrid{period / 2000, period});
      const double expected = kTwoPi * std::pow(kOmega0 / delta, 2);
      worst = std::max(worst, std::abs(std::abs(tr.phi_geo.back()) / expected - 1));
    }
    r.check(worst < 1e-6, "geometric phase 2pi (Omega0/delta)^2 at g = 0: max relative error %.2e", worst);
  }
  // |f(r,0)| |f(r,pi)| = 1.
  {
    double worst = 0.0;
    for (double rr = 0.0; rr <= 3.0; rr += 0.01) {
      worst = std::max(worst, std::abs(gain_from_r(rr, 0.0) * gain_from_r(rr, kPi) - 1));
    }
    r.check(worst < 1e-12, "|f(r,0)| |f(r,pi)| = 1: max error %.2e for r in [0, 3]", worst);
  }
  // Bootstrap coverage of the 16-84% interval.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticSurface truth;
    const int trials = 1000;
    int covered = 0, failed = 0;
    for (int k = 0; k < trials; ++k) {
      const auto data = truth.draw(derive_seed(777, static_cast<std::uint64_t>(k)));
      BootstrapOptions o;
      o.n_resamples = 5000;
      o.seed = derive_seed(778, static_cast<std::uint64_t>(k));
      o.sigma_g = truth.sigma_g;
      o.max_failure_fraction = 0.5;
      try {
        const auto b = bootstrap_t_est(data, truth.g, o);
        if (b.lower <= truth.t0 && truth.t0 <= b.upper) ++covered;
      } catch (const std::exception&) {
        ++failed;
      }
    }
    // An aborted bootstrap counts as a miss.
    const double cov = static_cast<double>(covered) / trials;
    r.check(std::abs(cov - 0.68) <= 0.05,
            "bootstrap coverage %.3f over %d synthetic surfaces, 5000 resamples each (0.68 +- 0.05); "
            "%d aborted; %.1f s",
            cov, trials, failed, seconds_since(t0));
  }
  // End-to-end determinism through the scenario runner.
  {
    const char* text = R"(
name = "determinism"
kind = "speedup_vs_g"
seed = 8
[noise]
gamma_hz = 5.2
sigma_delta_hz = 100
[ensemble]
n_runs = 40
steps_per_loop = 500
scan_points = 5
[sweep]
g_khz = [0, 25]
[analysis]
bootstrap_resamples = 500
g_sigma_khz = 0.2
max_failure_fraction = 0.5
)";
    const auto base = std::filesystem::temp_directory_path() / "ampgate_acceptance_7";
    std::filesystem::remove_all(base);
    ScenarioOverrides a, b;
    a.out_dir = (base / "a").string();
    b.out_dir = (base / "b").string();
    a.quiet = b.quiet = true;
    b.jobs = 4;
    const auto ra = run_scenario_text(text, "determinism", a);
    const auto rb = run_scenario_text(text, "determinism", b);
    bool same = ra.outputs == rb.outputs && !ra.outputs.empty();
    for (const auto& f : ra.outputs) {
      std::ifstream fa(base / "a" / f, std::ios::binary), fb(base / "b" / f, std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      same &= sa.str() == sb.str() && !sa.str().empty();
    }
    r.check(same, "byte-identical CSVs for 1 and 4 workers (%zu files)", ra.outputs.size());
  }
  return r.finish("property suite");
}

int criterion8() {
  Report r(8);
  const double om = khz_to_rad(20);
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(2.5e-6 * i);
  for (double xi : {0.3, 0.8, 1.56}) {
    const auto pop = squeezed_vacuum_populations(xi, squeeze_cutoff(xi) + 20);
    const auto fit = fit_squeeze_param(t, sideband_signal(pop.p, om, t), om, 0.0, 5e-6);
    r.check(std::abs(fit.xi - xi) < 1e-6, "|xi| = %.2f recovered as %.9f (g/2pi = %.4f kHz)", xi, fit.xi,
            rad_to_khz(fit.g));
  }

  // Ramsey record like an experiment: every shot draws its own static shift.
  const RamseyModel truth{khz_to_rad(4.59), khz_to_rad(0.47)};
  std::vector<double> tr, p;
  Rng rng(4590);
  std::normal_distribution<double> shift(truth.mean, truth.sigma);
  std::uniform_real_distribution<double> unif;
  const int shots = 200;
  for (int i = 0; i <= 100; ++i) {
    const double ti = 10e-6 * i;
    int dd = 0;
    for (int k = 0; k < shots; ++k) {
      const double s = std::sin(shift(rng) * ti / 2);
      dd += unif(rng) < s * s * s * s;
    }
    tr.push_back(ti);
    p.push_back(static_cast<double>(dd) / shots);
  }
  const auto fit = fit_ramsey(tr, p, {khz_to_rad(4.0), khz_to_rad(0.3)});
  const double dm = rad_to_khz(fit.model.mean) - 4.59, ds = rad_to_khz(fit.model.sigma) - 0.47;
  r.note("Ramsey data: 101 delays over 1 ms, 200 shots each, shift redrawn every shot");
  r.check(std::abs(dm) <= 0.02, "mean shift %.4f +- %.4f kHz (4.59 +- 0.02)", rad_to_khz(fit.model.mean),
          rad_to_khz(fit.mean_error));
  r.check(std::abs(ds) <= 0.04, "shift spread %.4f +- %.4f kHz (0.47 +- 0.04)", rad_to_khz(fit.model.sigma),
          rad_to_khz(fit.sigma_error));
  return r.finish("calibration round trips");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ampgate acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Criterion number 1-8")->required()->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  const std::vector<std::function<int()>> all = {criterion1, criterion2, criterion3, criterion4,
                                                 criterion5, criterion6, criterion7, criterion8};
  try {
    return all[static_cast<std::size_t>(criterion - 1)]();
  } catch (const std::exception& e) {
    std::printf("FAIL criterion %d: exception: %s\n", criterion, e.what());
    return 1;
  }
}
