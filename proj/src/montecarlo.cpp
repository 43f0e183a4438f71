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

#include "ampgate/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "ampgate/analysis.hpp"
#include "ampgate/design.hpp"
#include "ampgate/parallel.hpp"
#include "ampgate/rng.hpp"

namespace ampgate {

namespace {

// Stream index for the bootstrap; run i uses derive_seed(seed, i).
constexpr std::uint64_t kBootstrapStream = 0xb007ULL << 32;

double effective_delta_prime(const InteractionParams& p) {
  return p.g() == 0.0 ? std::abs(p.delta()) : effective_detuning(p.delta(), p.g());
}

struct Plan {
  Engine engine;
  int truncation = 0;
  TimeGrid grid;
};

Plan make_plan(const EnsembleConfig& config, double t_end) {
  Plan plan;
  plan.engine = config.resolved_engine();
  plan.grid = TimeGrid::for_params(config.params, t_end, config.integrator);
  if (plan.engine == Engine::kFock) {
    plan.truncation = config.truncation;
    if (plan.truncation <= 0) {
      const auto tr = trace_branch(config.params, NoiseRealization::none(), plan.grid,
                                   config.integrator);
      double max_alpha = 0.0;
      for (auto a : tr.alpha) max_alpha = std::max(max_alpha, std::abs(a));
      plan.truncation = choose_truncation(max_alpha);
    }
  }
  return plan;
}

struct RunOutput {
  std::vector<double> fidelity;
  bool truncation_warning = false;
};

RunOutput run_single(const EnsembleConfig& config, const Plan& plan, std::uint64_t seed) {
  const auto noise =
      NoiseRealization::draw(config.noise, seed, plan.grid.steps(), plan.grid.t_end);
  // The motional offset enters through the noise realization.
  const InteractionParams& params = config.params;
  RunOutput out;
  std::vector<double> t;
  if (plan.engine == Engine::kFock) {
    auto res = propagate_fock(params, noise, plan.grid, plan.truncation, config.integrator);
    out.fidelity = std::move(res.fidelity);
    out.truncation_warning = res.truncation_warning;
    t = std::move(res.t);
  } else {
    const auto tr = trace_branch(params, noise, plan.grid, config.integrator);
    out.fidelity = fidelity_curve(tr, config.integrator.measure);
    t = tr.t;
  }
  if (config.noise.heating_rate > 0) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      out.fidelity[k] = apply_heating_penalty(std::clamp(out.fidelity[k], 0.0, 1.0),
                                              config.noise.heating_rate, t[k]);
    }
  }
  return out;
}

double mean_of(const std::vector<double>& x) {
  // Fixed left-to-right order keeps the sum independent of scheduling.
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev_of(const std::vector<double>& x, double mean) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

std::pair<double, double> bootstrap_band(const std::vector<double>& values,
                                         std::uint64_t seed, int resamples) {
  if (resamples <= 0 || values.size() < 2) {
    const double m = mean_of(values);
    return {m, m};
  }
  Rng rng(derive_seed(seed, kBootstrapStream));
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
    m = s / static_cast<double>(values.size());
  }
  return {percentile(means, 0.16), percentile(means, 0.84)};
}

std::string format_g(double g) {
  std::ostringstream s;
  s << rad_to_khz(g) << " kHz";
  return s.str();
}

}  // namespace

void EnsembleConfig::validate() const {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  if (t_max < 0) throw std::invalid_argument("t_max must be >= 0");
  if (truncation < 0) throw std::invalid_argument("truncation must be >= 0");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (bootstrap_resamples < 0) throw std::invalid_argument("bootstrap_resamples must be >= 0");
  noise.validate();
  params.require_amplified_regime();
  resolved_engine();
}

Engine EnsembleConfig::resolved_engine() const {
  if (engine == Engine::kAuto) return noise.has_zeeman() ? Engine::kFock : Engine::kCoherent;
  if (engine == Engine::kCoherent && noise.has_zeeman()) {
    throw std::invalid_argument("the coherent engine cannot include a Zeeman shift; use fock");
  }
  return engine;
}

double EnsembleConfig::horizon() const {
  if (t_max > 0) return t_max;
  return 1.1 * kTwoPi / effective_delta_prime(params);
}

EnsembleResult run_ensemble(const EnsembleConfig& config) {
  config.validate();
  const Plan plan = make_plan(config, config.horizon());
  const auto n = static_cast<std::size_t>(config.n_runs);

  std::vector<RunOutput> runs(n);
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = derive_seed(config.seed, i);
  parallel_for(n, config.jobs, [&](std::size_t i) { runs[i] = run_single(config, plan, seeds[i]); });

  EnsembleResult res;
  res.engine = plan.engine;
  res.truncation = plan.truncation;
  res.run_seeds = seeds;
  const std::size_t nodes = plan.grid.steps() + 1;
  res.t.resize(nodes);
  for (std::size_t k = 0; k < nodes; ++k) res.t[k] = plan.grid.node(k);

  res.mean_curve.assign(nodes, 0.0);
  res.run_best_fidelity.resize(n);
  res.run_best_tau.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = runs[i].fidelity;
    for (std::size_t k = 0; k < nodes; ++k) res.mean_curve[k] += f[k];
    const auto best = std::max_element(f.begin(), f.end()) - f.begin();
    res.run_best_fidelity[i] = f[best];
    res.run_best_tau[i] = res.t[best];
    res.truncation_warning = res.truncation_warning || runs[i].truncation_warning;
  }
  for (auto& m : res.mean_curve) m /= static_cast<double>(n);

  const std::size_t best =
      std::max_element(res.mean_curve.begin(), res.mean_curve.end()) - res.mean_curve.begin();
  res.best_tau = res.t[best];
  res.best_fidelity = res.mean_curve[best];
  res.optimum_at_edge = best + 1 == nodes;

  std::vector<double> at_best(n);
  for (std::size_t i = 0; i < n; ++i) at_best[i] = runs[i].fidelity[best];
  res.sigma_f = stddev_of(at_best, res.best_fidelity) / std::sqrt(static_cast<double>(n));
  std::tie(res.ci_low, res.ci_high) =
      bootstrap_band(at_best, config.seed, config.bootstrap_resamples);
  res.mean_run_optimum = mean_of(res.run_best_fidelity);

  if (res.truncation_warning) {
    res.warnings.push_back("Fock truncation s=" + std::to_string(plan.truncation) +
                           " left population above 1e-6 in the top level");
  }
  if (res.optimum_at_edge) {
    res.warnings.push_back("mean fidelity peaks at the end of the tau range");
  }
  return res;
}

MeanFidelity mean_fidelity_at(const EnsembleConfig& config, double tau) {
  config.validate();
  if (!(tau > 0)) throw std::invalid_argument("tau must be > 0");
  // Same dt as run_ensemble; only the horizon changes, so each run sees the
  // same noise path up to tau.
  Plan plan = make_plan(config, config.horizon());
  plan.grid.t_end = tau;
  const auto n = static_cast<std::size_t>(config.n_runs);
  std::vector<double> f(n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    f[i] = run_single(config, plan, derive_seed(config.seed, i)).fidelity.back();
  });
  MeanFidelity out;
  out.fidelity = mean_of(f);
  out.sigma_f = stddev_of(f, out.fidelity) / std::sqrt(static_cast<double>(n));
  return out;
}

OptimalTau find_optimal_tau(const EnsembleConfig& config, double resolution) {
  OptimalTau out;
  out.ensemble = run_ensemble(config);
  const auto& e = out.ensemble;
  if (e.optimum_at_edge) {
    throw ConvergenceError("find_optimal_tau: mean fidelity is still rising at t_max = " +
                           std::to_string(e.t.back()) + " s");
  }
  const auto k = static_cast<std::size_t>(
      std::find(e.t.begin(), e.t.end(), e.best_tau) - e.t.begin());
  if (k == 0) {
    throw ConvergenceError("find_optimal_tau: maximum at tau = 0");
  }
  const double lo = e.t[k - 1];
  const double hi = e.t[k + 1];
  if (hi - lo <= resolution) {
    out.tau = e.best_tau;
    out.fidelity = e.best_fidelity;
    return out;
  }
  const int bits = std::clamp(
      static_cast<int>(std::ceil(std::log2(hi / resolution))) + 2, 8, 52);
  const auto [tau, neg_f] = boost::math::tools::brent_find_minima(
      [&](double t) { return -mean_fidelity_at(config, t).fidelity; }, lo, hi, bits);
  out.tau = tau;
  out.fidelity = -neg_f;
  if (out.fidelity < e.best_fidelity) {
    out.tau = e.best_tau;
    out.fidelity = e.best_fidelity;
  }
  return out;
}

GateOptimum optimize_gate(const EnsembleConfig& config, const DetuningScan& scan) {
  if (scan.points < 1 || !(scan.lo > 0) || scan.hi < scan.lo) {
    throw std::invalid_argument("invalid detuning scan");
  }
  const double g = config.params.g();
  GateOptimum out;
  out.design = solve_gate(config.params.omega0_rabi(), g, config.params.theta());
  const double t_max = config.t_max > 0 ? config.t_max : 1.1 * out.design.tau;

  auto evaluate = [&](double scale) {
    EnsembleConfig c = config;
    const double dp = scale * out.design.delta_prime;
    c.params = config.params.with_delta(std::sqrt(dp * dp + g * g));
    c.t_max = t_max;
    auto res = run_ensemble(c);
    out.trace.emplace_back(scale, res.best_fidelity);
    return std::make_pair(c.params.delta(), std::move(res));
  };

  double best_scale = scan.lo;
  double best_f = -1.0;
  const double step = scan.points > 1 ? (scan.hi - scan.lo) / (scan.points - 1) : 0.0;
  for (int i = 0; i < scan.points; ++i) {
    const double scale = scan.lo + step * i;
    auto [delta, res] = evaluate(scale);
    if (res.best_fidelity > best_f) {
      best_f = res.best_fidelity;
      best_scale = scale;
      out.delta = delta;
      out.ensemble = std::move(res);
    }
  }
  if (scan.refine && step > 0) {
    const double lo = std::max(scan.lo, best_scale - step);
    const double hi = std::min(scan.hi, best_scale + step);
    const auto [scale, neg_f] = boost::math::tools::brent_find_minima(
        [&](double s) { return -evaluate(s).second.best_fidelity; }, lo, hi, 16);
    if (-neg_f > best_f) {
      auto [delta, res] = evaluate(scale);
      best_scale = scale;
      out.delta = delta;
      out.ensemble = std::move(res);
    }
  }
  out.scale = best_scale;
  out.delta_prime = best_scale * out.design.delta_prime;
  if (out.ensemble.optimum_at_edge) {
    out.ensemble.warnings.push_back("optimum at end of tau range for g = " + format_g(g));
  }
  return out;
}

std::size_t GridResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& s) { return !s.valid; }));
}

GridResult fidelity_grid(const EnsembleConfig& config, const std::vector<GridPoint>& points) {
  GridResult out;
  out.g = config.params.g();
  out.theta = config.params.theta();
  out.n_runs = config.n_runs;
  out.samples.resize(points.size());
  out.seeds.resize(points.size());
  out.errors.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    auto& s = out.samples[i];
    s.t_i = pt.t_i;
    s.delta = pt.delta;
    out.seeds[i] = derive_seed(config.seed, 0x9e1du + i);
    try {
      if (!(std::abs(pt.delta) > out.g)) {
        throw InvalidRegimeError("invalid regime: delta <= g");
      }
      s.delta_prime = out.g == 0.0 ? std::abs(pt.delta) : effective_detuning(pt.delta, out.g);
      EnsembleConfig c = config;
      c.params = config.params.with_delta(pt.delta);
      c.seed = out.seeds[i];
      c.t_max = pt.t_i;
      const auto m = mean_fidelity_at(c, pt.t_i);
      s.fidelity = m.fidelity;
      s.sigma_f = m.sigma_f;
      s.valid = true;
    } catch (const std::exception& e) {
      s.valid = false;
      s.fidelity = std::nan("");
      s.sigma_f = std::nan("");
      out.errors[i] = e.what();
    }
  }
  return out;
}

void write_grid_csv(const GridResult& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(12);
  out << "g_hz,theta_rad,t_i_us,delta_hz,delta_prime_hz,fidelity,sigma_f,n_runs,seed\n";
  for (std::size_t i = 0; i < grid.samples.size(); ++i) {
    const auto& s = grid.samples[i];
    out << rad_to_hz(grid.g) << ',' << grid.theta << ',' << s.t_i * 1e6 << ','
        << rad_to_hz(s.delta) << ',';
    if (s.valid) {
      out << rad_to_hz(s.delta_prime) << ',' << s.fidelity << ',' << s.sigma_f;
    } else {
      out << "nan,nan,nan";
    }
    out << ',' << grid.n_runs << ',' << grid.seeds[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

GridResult read_grid_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("g_hz,theta_rad,t_i_us", 0) != 0) {
    throw std::runtime_error(path + ": unexpected header");
  }
  GridResult grid;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) {
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected 9 columns");
    }
    grid.g = hz_to_rad(std::stod(cells[0]));
    grid.theta = std::stod(cells[1]);
    FidelitySample s;
    s.t_i = std::stod(cells[2]) * 1e-6;
    s.delta = hz_to_rad(std::stod(cells[3]));
    s.delta_prime = hz_to_rad(std::stod(cells[4]));
    s.fidelity = std::stod(cells[5]);
    s.sigma_f = std::stod(cells[6]);
    s.valid = std::isfinite(s.fidelity);
    grid.n_runs = std::stoi(cells[7]);
    grid.samples.push_back(s);
    grid.seeds.push_back(std::stoull(cells[8]));
    grid.errors.emplace_back();
  }
  return grid;
}

const char* engine_name(Engine engine) {
  switch (engine) {
    case Engine::kCoherent: return "coherent";
    case Engine::kFock: return "fock";
    case Engine::kAuto: return "auto";
  }
  return "?";
}

Engine parse_engine(const std::string& name) {
  if (name == "coherent") return Engine::kCoherent;
  if (name == "fock") return Engine::kFock;
  if (name == "auto") return Engine::kAuto;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

}  // namespace ampgate
