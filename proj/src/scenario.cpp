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

#include "ampgate/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <random>
#include <toml.hpp>

#include "ampgate/analysis.hpp"
#include "ampgate/calibration.hpp"
#include "ampgate/design.hpp"
#include "ampgate/montecarlo.hpp"
#include "ampgate/rng.hpp"

#ifndef AMPGATE_VERSION
#define AMPGATE_VERSION "0.0.0"
#endif

namespace ampgate {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& source, int line, const std::string& field,
                         const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(field) {}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* version_string() { return AMPGATE_VERSION; }

namespace {

enum class Kind { kSpeedupVsG, kFidelityVsG, kTauVsTheta, kFidelityVsTheta, kSingleGate, kCalibrationDemo };

const std::map<std::string, Kind> kKinds = {
    {"speedup_vs_g", Kind::kSpeedupVsG},         {"fidelity_vs_g", Kind::kFidelityVsG},
    {"tau_vs_theta", Kind::kTauVsTheta},         {"fidelity_vs_theta", Kind::kFidelityVsTheta},
    {"single_gate", Kind::kSingleGate},          {"calibration_demo", Kind::kCalibrationDemo},
};

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "calibrated") return NoiseMode::kCalibrated;
  if (s == "literal") return NoiseMode::kLiteral;
  if (s == "coherence") return NoiseMode::kCoherence;
  throw std::invalid_argument("unknown noise mode '" + s + "' (calibrated, literal, coherence)");
}

// Reads one TOML table, remembering which keys were consumed so leftovers can
// be reported with their line.
class Section {
 public:
  Section(const toml::table* table, std::string name, const std::string& source)
      : table_(table), name_(std::move(name)), source_(source) {}

  bool present() const { return table_ != nullptr; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    int line = 0;
    if (table_) {
      if (const auto* node = table_->get(key)) {
        line = static_cast<int>(node->source().begin.line);
      } else if (!name_.empty()) {
        line = static_cast<int>(table_->source().begin.line);
      }
    }
    throw ConfigError(source_, line, field(key), message);
  }

  double number(const std::string& key, double fallback) {
    const auto* node = take(key);
    if (!node) return fallback;
    if (auto v = node->value<double>()) {
      if (!std::isfinite(*v)) fail(key, "must be finite");
      return *v;
    }
    fail(key, "expected a number");
  }

  double nonneg(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v < 0) fail(key, "must be >= 0");
    return v;
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0)) fail(key, "must be > 0");
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min) {
    const auto* node = take(key);
    if (!node) return fallback;
    const auto v = node->value_exact<std::int64_t>();
    if (!v) fail(key, "expected an integer");
    if (*v < min) fail(key, "must be >= " + std::to_string(min));
    return *v;
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto* node = take(key);
    if (!node) return fallback;
    if (auto v = node->value_exact<bool>()) return *v;
    fail(key, "expected true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const auto* node = take(key);
    if (!node) return fallback;
    if (auto v = node->value_exact<std::string>()) return *v;
    fail(key, "expected a string");
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto* node = take(key);
    if (!node) return std::nullopt;
    const auto* arr = node->as_array();
    if (!arr) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& el : *arr) {
      const auto v = el.value<double>();
      if (!v || !std::isfinite(*v)) fail(key, "expected an array of numbers");
      out.push_back(*v);
    }
    if (out.empty()) fail(key, "sweep list must not be empty");
    return out;
  }

  std::optional<std::vector<bool>> booleans(const std::string& key) {
    const auto* node = take(key);
    if (!node) return std::nullopt;
    const auto* arr = node->as_array();
    if (!arr) fail(key, "expected an array of booleans");
    std::vector<bool> out;
    for (const auto& el : *arr) {
      const auto v = el.value_exact<bool>();
      if (!v) fail(key, "expected an array of booleans");
      out.push_back(*v);
    }
    if (out.empty()) fail(key, "list must not be empty");
    return out;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, node] : *table_) {
      const std::string key(k.str());
      if (node.is_table() && name_.empty()) continue;
      if (!used_.count(key)) {
        throw ConfigError(source_, static_cast<int>(node.source().begin.line), field(key),
                          "unknown key");
      }
    }
  }

  std::string field(const std::string& key) const {
    return name_.empty() ? key : "[" + name_ + "] " + key;
  }

 private:
  const toml::node* take(const std::string& key) {
    used_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  const toml::table* table_;
  std::string name_;
  const std::string& source_;
  std::set<std::string> used_;
};

struct CalibrationSettings {
  double sideband_rabi = khz_to_rad(20);
  double squeeze_duration = 5e-6;
  double nbar = 0.0;
  double probe_max = 250e-6;
  int probe_points = 101;
  int shots = 200;
  double ramsey_max = 1e-3;
  int ramsey_points = 201;
  int ramsey_trials = 400;
};

struct Scenario {
  std::string name;
  Kind kind = Kind::kSingleGate;
  std::string kind_name;
  std::uint64_t seed = 1;
  std::string out;

  double omega0 = khz_to_rad(1.46);
  double g = 0.0;
  double theta = 0.0;
  double omega_mode = kDefaultModeFrequency;

  NoiseParams noise;
  EnsembleConfig ensemble;
  DetuningScan scan;

  std::vector<double> g_list;
  std::vector<double> theta_list;
  std::vector<bool> zeeman_cases;

  // Relative to the grid center.
  std::vector<double> t_fractions{0.92, 0.96, 1.0, 1.04, 1.08};
  std::vector<double> dp_fractions{0.92, 0.96, 1.0, 1.04, 1.08};
  std::string grid_center = "optimum";

  int bootstrap_resamples = 5000;
  double g_sigma = 0.0;
  double g_sigma_fraction = 0.0;
  double max_failure_fraction = 0.1;
  bool per_point_g = false;
  bool weighted = false;
  std::string fix = "optimum";

  CalibrationSettings cal;
};

Scenario parse_scenario(const toml::table& root, const std::string& source,
                        const ScenarioOverrides& ov) {
  static const std::set<std::string> kSections = {"interaction", "noise", "ensemble", "sweep",
                                                  "grid",        "analysis", "calibration"};
  for (const auto& [k, node] : root) {
    if (node.is_table() && !kSections.count(std::string(k.str()))) {
      throw ConfigError(source, static_cast<int>(node.source().begin.line), std::string(k.str()),
                        "unknown section");
    }
  }
  Section top(&root, "", source);
  Section inter(root["interaction"].as_table(), "interaction", source);
  Section noise(root["noise"].as_table(), "noise", source);
  Section ens(root["ensemble"].as_table(), "ensemble", source);
  Section sweep(root["sweep"].as_table(), "sweep", source);
  Section grid(root["grid"].as_table(), "grid", source);
  Section ana(root["analysis"].as_table(), "analysis", source);
  Section cal(root["calibration"].as_table(), "calibration", source);

  Scenario s;
  s.name = top.string("name", "");
  if (s.name.empty()) top.fail("name", "required");
  s.kind_name = top.string("kind", "");
  const auto kind = kKinds.find(s.kind_name);
  if (kind == kKinds.end()) {
    top.fail("kind",
             "expected one of speedup_vs_g, fidelity_vs_g, tau_vs_theta, fidelity_vs_theta, "
             "single_gate, calibration_demo");
  }
  s.kind = kind->second;
  s.seed = static_cast<std::uint64_t>(top.integer("seed", 1, 0));
  s.out = top.string("out", "");

  s.omega0 = khz_to_rad(inter.positive("omega0_rabi_khz", 1.46));
  s.g = khz_to_rad(inter.nonneg("g_khz", 0.0));
  s.theta = kTwoPi * inter.number("theta_over_2pi", 0.0);
  s.omega_mode = kTwoPi * 1e6 * inter.positive("mode_freq_mhz", kDefaultModeFrequency / kTwoPi / 1e6);

  s.noise.gamma = hz_to_rad(noise.nonneg("gamma_hz", 0.0));
  s.noise.sigma_delta = hz_to_rad(noise.nonneg("sigma_delta_hz", 0.0));
  s.noise.heating_rate = noise.nonneg("heating_quanta_per_s", 0.0);
  s.noise.zeeman_mean = khz_to_rad(noise.nonneg("zeeman_mean_khz", 0.0));
  s.noise.zeeman_sigma = khz_to_rad(noise.nonneg("zeeman_sigma_khz", 0.0));
  s.noise.zeeman_interval = 1e-3 * noise.positive("zeeman_interval_ms", 1.0);

  auto& e = s.ensemble;
  e.n_runs = static_cast<int>(ens.integer("n_runs", 600, 1));
  e.truncation = static_cast<int>(ens.integer("truncation", 0, 0));
  e.integrator.steps_per_loop = static_cast<int>(ens.integer("steps_per_loop", 2000, 50));
  e.integrator.steps_per_drive_period =
      static_cast<int>(ens.integer("steps_per_drive_period", 100, 20));
  e.bootstrap_resamples = static_cast<int>(ens.integer("bootstrap_resamples", 1000, 1));
  e.integrator.compensate_zeeman_mean = ens.boolean("compensate_zeeman_mean", true);
  std::string engine = ens.string("engine", "auto");
  bool rwa = ens.boolean("rwa", true);
  std::string mode = ens.string("noise_mode", "calibrated");
  s.scan.lo = ens.positive("scan_lo", s.scan.lo);
  s.scan.hi = ens.positive("scan_hi", s.scan.hi);
  s.scan.points = static_cast<int>(ens.integer("scan_points", s.scan.points, 1));
  s.scan.refine = ens.boolean("scan_refine", true);
  if (s.scan.hi < s.scan.lo) ens.fail("scan_hi", "must be >= scan_lo");
  try {
    e.engine = parse_engine(engine);
  } catch (const std::invalid_argument& ex) {
    ens.fail("engine", ex.what());
  }
  try {
    e.integrator.noise_mode = parse_noise_mode(mode);
  } catch (const std::invalid_argument& ex) {
    ens.fail("noise_mode", ex.what());
  }

  // Flags win over the file.
  if (ov.seed) s.seed = *ov.seed;
  if (ov.engine) {
    try {
      e.engine = parse_engine(*ov.engine);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError("--engine", 0, "", ex.what());
    }
  }
  if (ov.rwa) rwa = *ov.rwa;
  if (ov.noise_mode) {
    try {
      e.integrator.noise_mode = parse_noise_mode(*ov.noise_mode);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError("--noise-mode", 0, "", ex.what());
    }
  }
  e.integrator.rwa = rwa;
  e.noise = s.noise;
  e.jobs = std::max(1, ov.jobs);

  if (auto v = sweep.numbers("g_khz")) {
    for (double x : *v) {
      if (x < 0) sweep.fail("g_khz", "values must be >= 0");
      s.g_list.push_back(khz_to_rad(x));
    }
  }
  if (auto v = sweep.numbers("theta_over_2pi")) {
    for (double x : *v) s.theta_list.push_back(kTwoPi * x);
  }
  if (auto v = sweep.booleans("with_zeeman")) s.zeeman_cases = *v;

  s.grid_center = grid.string("center", "optimum");
  if (s.grid_center != "optimum" && s.grid_center != "design") {
    grid.fail("center", "expected \"optimum\" or \"design\"");
  }
  if (auto v = grid.numbers("t_fractions")) s.t_fractions = *v;
  if (auto v = grid.numbers("delta_prime_fractions")) s.dp_fractions = *v;
  for (double x : s.t_fractions) {
    if (!(x > 0)) grid.fail("t_fractions", "values must be > 0");
  }
  for (double x : s.dp_fractions) {
    if (!(x > 0)) grid.fail("delta_prime_fractions", "values must be > 0");
  }
  if (s.t_fractions.size() * s.dp_fractions.size() < 6) {
    grid.fail("t_fractions", "the (t_I, delta') grid needs at least 6 points for a surface fit");
  }

  s.bootstrap_resamples = static_cast<int>(ana.integer("bootstrap_resamples", 5000, 1));
  s.g_sigma = khz_to_rad(ana.nonneg("g_sigma_khz", 0.0));
  s.g_sigma_fraction = ana.nonneg("g_sigma_fraction", 0.0);
  if (s.g_sigma > 0 && s.g_sigma_fraction > 0) {
    ana.fail("g_sigma_fraction", "give either g_sigma_khz or g_sigma_fraction, not both");
  }
  s.max_failure_fraction = ana.nonneg("max_failure_fraction", 0.1);
  if (s.max_failure_fraction > 1) ana.fail("max_failure_fraction", "must be <= 1");
  s.per_point_g = ana.boolean("per_point_g", false);
  s.weighted = ana.boolean("weighted", false);
  s.fix = ana.string("fix", "optimum");
  if (s.fix != "optimum" && s.fix != "design") ana.fail("fix", "expected \"optimum\" or \"design\"");

  s.cal.sideband_rabi = khz_to_rad(cal.positive("sideband_rabi_khz", 20.0));
  s.cal.squeeze_duration = 1e-6 * cal.positive("squeeze_duration_us", 5.0);
  s.cal.nbar = cal.nonneg("nbar", 0.0);
  s.cal.probe_max = 1e-6 * cal.positive("probe_max_us", 250.0);
  s.cal.probe_points = static_cast<int>(cal.integer("probe_points", 101, 3));
  s.cal.shots = static_cast<int>(cal.integer("shots", 200, 0));
  s.cal.ramsey_max = 1e-3 * cal.positive("ramsey_max_ms", 1.0);
  s.cal.ramsey_points = static_cast<int>(cal.integer("ramsey_points", 201, 3));
  s.cal.ramsey_trials = static_cast<int>(cal.integer("ramsey_trials", 400, 1));

  for (const auto* sec : {&top, &inter, &noise, &ens, &sweep, &grid, &ana, &cal}) sec->finish();

  // Kind-specific requirements.
  switch (s.kind) {
    case Kind::kSpeedupVsG:
      if (s.g_list.empty()) sweep.fail("g_khz", "required for speedup_vs_g");
      if (std::find(s.g_list.begin(), s.g_list.end(), 0.0) == s.g_list.end()) {
        sweep.fail("g_khz", "must include 0, the unamplified reference");
      }
      break;
    case Kind::kFidelityVsG:
      if (s.g_list.empty()) sweep.fail("g_khz", "required for fidelity_vs_g");
      break;
    case Kind::kTauVsTheta:
    case Kind::kFidelityVsTheta:
      if (s.theta_list.empty()) sweep.fail("theta_over_2pi", "required for " + s.kind_name);
      break;
    case Kind::kSingleGate:
      if (s.g_list.empty()) s.g_list = {s.g};
      if (s.theta_list.empty()) s.theta_list = {s.theta};
      break;
    case Kind::kCalibrationDemo:
      if (!(s.g > 0)) inter.fail("g_khz", "calibration_demo needs g > 0");
      if (s.cal.sideband_rabi * s.cal.probe_max < kTwoPi) {
        cal.fail("probe_max_us", "probe must cover one sideband flopping period");
      }
      break;
  }
  if (s.zeeman_cases.empty()) s.zeeman_cases = {s.noise.has_zeeman()};
  if (std::count(s.zeeman_cases.begin(), s.zeeman_cases.end(), true) > 0 && !s.noise.has_zeeman()) {
    sweep.fail("with_zeeman", "a true entry needs zeeman_mean_khz or zeeman_sigma_khz in [noise]");
  }
  for (bool z : s.zeeman_cases) {
    if (z && e.engine == Engine::kCoherent) {
      ens.fail("engine", "the coherent engine cannot include an ac Zeeman shift; use fock or auto");
    }
  }
  return s;
}

// Effective config: the file with command-line overrides applied.
toml::table effective_table(toml::table root, const ScenarioOverrides& ov) {
  auto section = [&](const char* name) -> toml::table& {
    if (!root[name].is_table()) root.insert_or_assign(name, toml::table{});
    return *root[name].as_table();
  };
  if (ov.seed) root.insert_or_assign("seed", static_cast<std::int64_t>(*ov.seed));
  if (ov.engine) section("ensemble").insert_or_assign("engine", *ov.engine);
  if (ov.rwa) section("ensemble").insert_or_assign("rwa", *ov.rwa);
  if (ov.noise_mode) section("ensemble").insert_or_assign("noise_mode", *ov.noise_mode);
  return root;
}

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  ~Csv() = default;
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

class Runner {
 public:
  Runner(const Scenario& s, const ScenarioOverrides& ov, fs::path dir)
      : s_(s), ov_(ov), dir_(std::move(dir)) {}

  void run() {
    switch (s_.kind) {
      case Kind::kSpeedupVsG: speedup_vs_g(); break;
      case Kind::kFidelityVsG: fidelity_vs_g(); break;
      case Kind::kTauVsTheta: tau_vs_theta(); break;
      case Kind::kFidelityVsTheta: fidelity_vs_theta(); break;
      case Kind::kSingleGate: single_gate(); break;
      case Kind::kCalibrationDemo: calibration_demo(); break;
    }
  }

  json points = json::array();
  std::vector<std::string> outputs;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  int rows = 0;
  int failed_rows = 0;

 private:
  void log(const std::string& msg) const {
    if (!ov_.quiet) std::cerr << "ampgate: " << msg << '\n';
  }

  std::string file(const std::string& name) {
    outputs.push_back(name);
    return (dir_ / name).string();
  }

  void record_point(const std::string& label, std::uint64_t seed) {
    points.push_back({{"label", label}, {"seed", seed}});
  }

  void fail(const std::string& what) {
    failures.push_back(what);
    log("failed: " + what);
  }

  EnsembleConfig base(double g, double theta, bool zeeman) const {
    EnsembleConfig c = s_.ensemble;
    c.params = InteractionParams(s_.omega0, g, theta, g + s_.omega0, s_.omega_mode);
    if (!zeeman) {
      c.noise.zeeman_mean = 0.0;
      c.noise.zeeman_sigma = 0.0;
    }
    return c;
  }

  // Calibration uncertainty of g; none when the drive is off.
  double g_sigma(double g) const {
    if (!(g > 0)) return 0.0;
    return s_.g_sigma_fraction > 0 ? s_.g_sigma_fraction * g : s_.g_sigma;
  }

  struct SurfacePoint {
    GateSolution design;
    double t_center = 0.0;
    double dp_center = 0.0;
    QuadSurfaceFit fit;
    std::optional<BootstrapResult> boot;
  };

  // Ensemble fidelity on a (t_I, δ′) grid around the solve_gate point, then
  // the quadratic surface fit and its bootstrap.
  SurfacePoint surface(double g, double theta, std::uint64_t seed, const std::string& label,
                       const std::string& csv_name) {
    SurfacePoint out;
    out.design = solve_gate(s_.omega0, g, theta);
    EnsembleConfig c = base(g, theta, s_.noise.has_zeeman());
    c.seed = seed;
    out.t_center = out.design.tau;
    out.dp_center = out.design.delta_prime;
    if (s_.grid_center == "optimum") {
      const auto opt = optimize_gate(c, s_.scan);
      out.t_center = opt.ensemble.best_tau;
      out.dp_center = opt.delta_prime;
    }
    std::vector<GridPoint> pts;
    for (double tf : s_.t_fractions) {
      for (double df : s_.dp_fractions) {
        const double dp = df * out.dp_center;
        pts.push_back({tf * out.t_center, std::sqrt(dp * dp + g * g)});
      }
    }
    const GridResult grid = fidelity_grid(c, pts);
    write_grid_csv(grid, file(csv_name));
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
      record_point(label + " t_us=" + num(pts[i].t_i * 1e6) + " delta_hz=" + num(rad_to_hz(pts[i].delta)),
                   grid.seeds[i]);
      if (!grid.samples[i].valid) fail(label + " grid point " + std::to_string(i) + ": " + grid.errors[i]);
    }
    out.fit = fit_quad_surface(deltas_to_delta_prime(grid.samples, g, 0.0), {s_.weighted});
    if (!out.fit.has_maximum) {
      throw ConvergenceError("surface fit has no interior maximum");
    }
    BootstrapOptions bo;
    bo.n_resamples = s_.bootstrap_resamples;
    // One bootstrap seed for every sweep entry keeps resample i aligned.
    bo.seed = derive_seed(s_.seed, 0xb007);
    bo.sigma_g = g_sigma(g);
    bo.max_failure_fraction = s_.max_failure_fraction;
    bo.per_point_g = s_.per_point_g;
    bo.weighted = s_.weighted;
    bo.jobs = c.jobs;
    out.boot = bootstrap_t_est(grid.samples, g, bo);
    return out;
  }

  void write_fit_row(Csv& csv, double key, const SurfacePoint& p) {
    csv.row({num(key), num(p.fit.t_est() * 1e6), num(std::sqrt(p.fit.covariance(4, 4)) * 1e6),
             num(rad_to_khz(p.fit.delta_prime_est())), num(p.fit.a[0]), num(p.t_center * 1e6),
             num(rad_to_khz(p.dp_center)), num(p.design.tau * 1e6),
             num(rad_to_khz(p.design.delta_prime)), num(p.design.gain),
             std::to_string(p.boot ? p.boot->failures : 0)});
  }

  void speedup_vs_g() {
    const int n = static_cast<int>(s_.g_list.size());
    std::vector<std::optional<SurfacePoint>> res(static_cast<std::size_t>(n));
    Csv fits(file("surface_fits.csv"), {"g_khz", "t_est_us", "t_est_sigma_us", "delta_prime_est_khz",
                                        "f_max", "t_center_us", "delta_prime_center_khz", "t_design_us",
                                        "delta_prime_design_khz", "gain",
                                        "bootstrap_failures"});
    for (int i = 0; i < n; ++i) {
      const double g = s_.g_list[static_cast<std::size_t>(i)];
      const std::string label = "g_khz=" + num(rad_to_khz(g));
      log("[" + std::to_string(i + 1) + "/" + std::to_string(n) + "] " + label);
      try {
        res[static_cast<std::size_t>(i)] =
            surface(g, s_.theta, derive_seed(s_.seed, static_cast<std::uint64_t>(i)), label,
                    "grid_g" + std::to_string(i) + ".csv");
        write_fit_row(fits, rad_to_khz(g), *res[static_cast<std::size_t>(i)]);
      } catch (const std::exception& ex) {
        fail(label + ": " + ex.what());
      }
    }
    fits.close();

    const auto ref = std::find(s_.g_list.begin(), s_.g_list.end(), 0.0) - s_.g_list.begin();
    const auto& t0 = res[static_cast<std::size_t>(ref)];
    if (!t0) throw ConvergenceError("the g = 0 reference fit failed; no speedup can be formed");
    Csv csv(file("speedup.csv"), {"g_khz", "speedup", "ci_low", "ci_high", "g_sigma_khz"});
    for (int i = 0; i < n; ++i) {
      const double g = s_.g_list[static_cast<std::size_t>(i)];
      const auto& r = res[static_cast<std::size_t>(i)];
      const double gs = rad_to_khz(g_sigma(g));
      ++rows;
      if (!r) {
        ++failed_rows;
        csv.row({num(rad_to_khz(g)), "nan", "nan", "nan", num(gs)});
        continue;
      }
      try {
        const auto sp = bootstrap_speedup(*t0->boot, *r->boot);
        csv.row({num(rad_to_khz(g)), num(sp.estimate), num(sp.lower), num(sp.upper), num(gs)});
      } catch (const std::exception& ex) {
        ++failed_rows;
        fail("speedup at g_khz=" + num(rad_to_khz(g)) + ": " + ex.what());
        csv.row({num(rad_to_khz(g)), "nan", "nan", "nan", num(gs)});
      }
    }
    csv.close();
  }

  void tau_vs_theta() {
    const int n = static_cast<int>(s_.theta_list.size());
    Csv fits(file("surface_fits.csv"), {"theta_over_2pi", "t_est_us", "t_est_sigma_us",
                                        "delta_prime_est_khz", "f_max", "t_center_us",
                                        "delta_prime_center_khz", "t_design_us",
                                        "delta_prime_design_khz", "gain", "bootstrap_failures"});
    Csv csv(file("tau_vs_theta.csv"),
            {"theta_over_2pi", "t_est_us", "ci_low_us", "ci_high_us", "t_theory_us"});
    for (int i = 0; i < n; ++i) {
      const double th = s_.theta_list[static_cast<std::size_t>(i)];
      const std::string label = "theta_over_2pi=" + num(th / kTwoPi);
      log("[" + std::to_string(i + 1) + "/" + std::to_string(n) + "] " + label);
      ++rows;
      const double t_theory = solve_gate(s_.omega0, s_.g, th).tau;
      try {
        const auto p = surface(s_.g, th, derive_seed(s_.seed, static_cast<std::uint64_t>(i)), label,
                               "grid_theta" + std::to_string(i) + ".csv");
        write_fit_row(fits, th / kTwoPi, p);
        csv.row({num(th / kTwoPi), num(p.boot->estimate * 1e6), num(p.boot->lower * 1e6),
                 num(p.boot->upper * 1e6), num(t_theory * 1e6)});
      } catch (const std::exception& ex) {
        ++failed_rows;
        fail(label + ": " + ex.what());
        csv.row({num(th / kTwoPi), "nan", "nan", "nan", num(t_theory * 1e6)});
      }
    }
    fits.close();
    csv.close();
  }

  void fidelity_vs_g() {
    Csv csv(file("fidelity_vs_g.csv"), {"g_khz", "fidelity", "ci_low", "ci_high", "with_zeeman"});
    Csv detail(file("fidelity_vs_g_detail.csv"),
               {"g_khz", "with_zeeman", "tau_us", "delta_prime_khz", "delta_prime_scale", "sigma_f",
                "mean_run_optimum", "engine", "truncation", "seed"});
    int idx = 0;
    const int total = static_cast<int>(s_.zeeman_cases.size() * s_.g_list.size());
    for (bool z : s_.zeeman_cases) {
      for (double g : s_.g_list) {
        const std::string label = "g_khz=" + num(rad_to_khz(g)) + " zeeman=" + (z ? "1" : "0");
        log("[" + std::to_string(idx + 1) + "/" + std::to_string(total) + "] " + label);
        EnsembleConfig c = base(g, s_.theta, z);
        c.seed = derive_seed(s_.seed, static_cast<std::uint64_t>(idx++));
        record_point(label, c.seed);
        ++rows;
        try {
          const auto opt = optimize_gate(c, s_.scan);
          const auto& e = opt.ensemble;
          for (const auto& w : e.warnings) warnings.push_back(label + ": " + w);
          csv.row({num(rad_to_khz(g)), num(e.best_fidelity), num(e.ci_low), num(e.ci_high), z ? "1" : "0"});
          detail.row({num(rad_to_khz(g)), z ? "1" : "0", num(e.best_tau * 1e6),
                      num(rad_to_khz(opt.delta_prime)), num(opt.scale), num(e.sigma_f),
                      num(e.mean_run_optimum), engine_name(e.engine), std::to_string(e.truncation),
                      std::to_string(c.seed)});
        } catch (const std::exception& ex) {
          ++failed_rows;
          fail(label + ": " + ex.what());
          csv.row({num(rad_to_khz(g)), "nan", "nan", "nan", z ? "1" : "0"});
        }
      }
    }
    csv.close();
    detail.close();
  }

  void fidelity_vs_theta() {
    Csv csv(file("fidelity_vs_theta.csv"),
            {"theta_over_2pi", "fidelity", "ci_low", "ci_high", "with_zeeman"});
    const bool z = s_.noise.has_zeeman();
    // Gate settings fixed at the reference θ.
    EnsembleConfig ref = base(s_.g, s_.theta, z);
    ref.seed = derive_seed(s_.seed, 0);
    record_point("reference", ref.seed);
    double tau = 0.0, delta = 0.0;
    if (s_.fix == "optimum") {
      log("optimizing the gate at the reference theta");
      const auto opt = optimize_gate(ref, s_.scan);
      tau = opt.ensemble.best_tau;
      delta = opt.delta;
    } else {
      const auto sol = solve_gate(s_.omega0, s_.g, s_.theta);
      tau = sol.tau;
      delta = sol.delta;
    }
    Csv fixed(file("fixed_gate.csv"), {"g_khz", "theta_ref_over_2pi", "t_i_us", "delta_khz", "fix"});
    fixed.row({num(rad_to_khz(s_.g)), num(s_.theta / kTwoPi), num(tau * 1e6), num(rad_to_khz(delta)), s_.fix});
    fixed.close();

    // Every θ sees the same noise draws, so differences come from θ alone.
    const std::uint64_t seed = derive_seed(s_.seed, 1);
    const int n = static_cast<int>(s_.theta_list.size());
    for (int i = 0; i < n; ++i) {
      const double th = s_.theta_list[static_cast<std::size_t>(i)];
      const std::string label = "theta_over_2pi=" + num(th / kTwoPi);
      log("[" + std::to_string(i + 1) + "/" + std::to_string(n) + "] " + label);
      record_point(label, seed);
      ++rows;
      try {
        EnsembleConfig c = base(s_.g, th, z);
        c.params = c.params.with_delta(delta);
        c.seed = seed;
        c.t_max = tau;
        const auto m = mean_fidelity_at(c, tau);
        csv.row({num(th / kTwoPi), num(m.fidelity), num(m.fidelity - m.sigma_f),
                 num(m.fidelity + m.sigma_f), z ? "1" : "0"});
      } catch (const std::exception& ex) {
        ++failed_rows;
        fail(label + ": " + ex.what());
        csv.row({num(th / kTwoPi), "nan", "nan", "nan", z ? "1" : "0"});
      }
    }
    csv.close();
  }

  void single_gate() {
    Csv csv(file("single_gate.csv"),
            {"g_khz", "theta_over_2pi", "delta_khz", "delta_prime_khz", "tau_us", "gain", "fidelity",
             "ci_low", "ci_high", "best_tau_us", "best_fidelity", "with_zeeman"});
    const bool z = s_.noise.has_zeeman();
    int idx = 0;
    for (double g : s_.g_list) {
      for (double th : s_.theta_list) {
        const std::string label = "g_khz=" + num(rad_to_khz(g)) + " theta_over_2pi=" + num(th / kTwoPi);
        log(label);
        ++rows;
        try {
          const auto sol = solve_gate(s_.omega0, g, th);
          EnsembleConfig c = base(g, th, z);
          c.params = c.params.with_delta(sol.delta);
          c.seed = derive_seed(s_.seed, static_cast<std::uint64_t>(idx++));
          record_point(label, c.seed);
          const auto m = mean_fidelity_at(c, sol.tau);
          const auto e = run_ensemble(c);
          csv.row({num(rad_to_khz(g)), num(th / kTwoPi), num(rad_to_khz(sol.delta)),
                   num(rad_to_khz(sol.delta_prime)), num(sol.tau * 1e6), num(sol.gain), num(m.fidelity),
                   num(m.fidelity - m.sigma_f), num(m.fidelity + m.sigma_f), num(e.best_tau * 1e6),
                   num(e.best_fidelity), z ? "1" : "0"});
        } catch (const std::exception& ex) {
          ++failed_rows;
          fail(label + ": " + ex.what());
        }
      }
    }
    csv.close();
  }

  std::vector<double> with_shots(const std::vector<double>& p, std::uint64_t seed,
                                 std::vector<double>* sigma) const {
    Rng rng(seed);
    std::vector<double> out(p.size());
    sigma->assign(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double q = std::clamp(p[i], 0.0, 1.0);
      if (s_.cal.shots == 0) {
        out[i] = q;
        continue;
      }
      std::binomial_distribution<int> b(s_.cal.shots, q);
      out[i] = static_cast<double>(b(rng)) / s_.cal.shots;
      (*sigma)[i] = std::sqrt(q * (1 - q) / s_.cal.shots);
    }
    return out;
  }

  void calibration_demo() {
    const auto& k = s_.cal;
    Csv summary(file("calibration_fit.csv"), {"quantity", "truth", "estimate", "error"});

    // Squeeze: sideband flopping after a squeeze of |ξ| = g·duration.
    const double xi = s_.g * k.squeeze_duration;
    CalibrationData sq;
    for (int i = 0; i < k.probe_points; ++i) sq.t.push_back(k.probe_max * i / (k.probe_points - 1));
    const auto pop = squeezed_thermal_populations(xi, k.nbar, population_cutoff(xi, k.nbar, 1e-9));
    const auto seed_sq = derive_seed(s_.seed, 0);
    record_point("squeeze_signal", seed_sq);
    sq.p_bright = with_shots(sideband_signal(pop.p, k.sideband_rabi, sq.t), seed_sq, &sq.sigma);
    write_calibration_csv(sq, file("squeeze_signal.csv"));
    ++rows;
    try {
      SqueezeFitOptions so;
      so.xi_max = std::max(3.0, 1.5 * xi);
      const auto fit = fit_squeeze_param(sq.t, sq.p_bright, k.sideband_rabi, k.nbar, k.squeeze_duration, so);
      if (fit.unidentifiable) warnings.push_back("squeeze fit: residual is flat in |xi|");
      summary.row({"xi", num(xi), num(fit.xi), "nan"});
      summary.row({"g_khz", num(rad_to_khz(s_.g)), num(rad_to_khz(fit.g)), "nan"});
    } catch (const std::exception& ex) {
      ++failed_rows;
      fail(std::string("squeeze fit: ") + ex.what());
    }

    if (s_.noise.has_zeeman()) {
      const RamseyModel truth{s_.noise.zeeman_mean, s_.noise.zeeman_sigma};
      CalibrationData rd;
      for (int i = 0; i < k.ramsey_points; ++i) rd.t.push_back(k.ramsey_max * i / (k.ramsey_points - 1));
      const auto seed_trials = derive_seed(s_.seed, 1);
      const auto seed_shots = derive_seed(s_.seed, 2);
      record_point("ramsey_trials", seed_trials);
      record_point("ramsey_shots", seed_shots);
      const auto curves = ramsey_populations(truth, rd.t, k.ramsey_trials, seed_trials);
      rd.p_bright = with_shots(curves.p_down_down, seed_shots, &rd.sigma);
      write_calibration_csv(rd, file("ramsey_signal.csv"));
      ++rows;
      try {
        const auto fit = fit_ramsey(rd.t, rd.p_bright, truth);
        summary.row({"zeeman_mean_khz", num(rad_to_khz(truth.mean)), num(rad_to_khz(fit.model.mean)),
                     num(rad_to_khz(fit.mean_error))});
        summary.row({"zeeman_sigma_khz", num(rad_to_khz(truth.sigma)), num(rad_to_khz(fit.model.sigma)),
                     num(rad_to_khz(fit.sigma_error))});
      } catch (const std::exception& ex) {
        ++failed_rows;
        fail(std::string("ramsey fit: ") + ex.what());
      }
    }
    summary.close();
  }

  const Scenario& s_;
  const ScenarioOverrides& ov_;
  fs::path dir_;
};

struct Prepared {
  Scenario scenario;
  std::string effective;
};

Prepared prepare(const std::string& text, const std::string& source, const ScenarioOverrides& ov) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& err) {
    throw ConfigError(source, static_cast<int>(err.source().begin.line), "",
                      std::string(err.description()));
  }
  Prepared p;
  p.scenario = parse_scenario(root, source, ov);
  std::ostringstream eff;
  eff << effective_table(std::move(root), ov) << '\n';
  p.effective = eff.str();
  return p;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string validate_scenario_text(const std::string& text, const std::string& source,
                                   const ScenarioOverrides& overrides) {
  return prepare(text, source, overrides).effective;
}

ScenarioOutcome run_scenario_text(const std::string& text, const std::string& source,
                                  const ScenarioOverrides& overrides) {
  const Prepared p = prepare(text, source, overrides);
  const Scenario& s = p.scenario;

  ScenarioOutcome outcome;
  fs::path dir = !overrides.out_dir.empty() ? fs::path(overrides.out_dir)
                 : !s.out.empty()           ? fs::path(s.out)
                                            : fs::path("out") / s.name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError(source, 0, "out", "cannot create output directory " + dir.string());
  }
  {
    const fs::path probe = dir / ".ampgate_write_test";
    std::ofstream t(probe);
    if (!t) throw ConfigError(source, 0, "out", "output directory is not writable: " + dir.string());
    t.close();
    fs::remove(probe, ec);
  }
  outcome.out_dir = dir.string();

  Runner runner(s, overrides, dir);
  std::string fatal;
  try {
    runner.run();
  } catch (const std::exception& ex) {
    fatal = ex.what();
    runner.failures.push_back(fatal);
  }

  if (!fatal.empty()) {
    outcome.exit_code = kExitNumericalFailure;
  } else if (runner.rows > 0 && runner.failed_rows == runner.rows) {
    outcome.exit_code = kExitNumericalFailure;
  } else if (!runner.failures.empty()) {
    outcome.exit_code = kExitPartialFailure;
  }

  json m;
  m["tool"] = "ampgate";
  m["version"] = version_string();
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["compiler"] = __VERSION__;
  m["name"] = s.name;
  m["kind"] = s.kind_name;
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a64(p.effective));
  m["master_seed"] = s.seed;
  m["engine"] = engine_name(s.ensemble.engine);
  m["rwa"] = s.ensemble.integrator.rwa;
  m["points"] = runner.points;
  m["outputs"] = runner.outputs;
  m["failures"] = runner.failures;
  m["warnings"] = runner.warnings;
  m["exit_code"] = outcome.exit_code;
  m["config"] = p.effective;
  outcome.manifest_path = (dir / "manifest.json").string();
  std::ofstream mf(outcome.manifest_path);
  mf << m.dump(2) << '\n';
  if (!mf) throw std::runtime_error("cannot write " + outcome.manifest_path);

  outcome.outputs = runner.outputs;
  outcome.failures = runner.failures;
  return outcome;
}

ScenarioOutcome run_scenario(const std::string& config_path, const ScenarioOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError(config_path, 0, "", "cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  return run_scenario_text(ss.str(), config_path, overrides);
}

std::string config_from_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError(manifest_path, 0, "", "cannot read file");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError(manifest_path, 0, "", ex.what());
  }
  if (!m.contains("config") || !m["config"].is_string()) {
    throw ConfigError(manifest_path, 0, "config", "manifest has no embedded config");
  }
  return m["config"].get<std::string>();
}

}  // namespace ampgate
