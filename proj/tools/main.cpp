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

// ampgate: scenario runner for amplified Mølmer–Sørensen gate simulations.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ampgate/design.hpp"
#include "ampgate/scenario.hpp"

namespace {

void add_run_flags(CLI::App* cmd, ampgate::ScenarioOverrides& ov) {
  cmd->add_option_function<std::uint64_t>("--seed", [&ov](std::uint64_t s) { ov.seed = s; },
                                          "Master seed (overrides the file)");
  cmd->add_option("--jobs", ov.jobs, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", ov.out_dir, "Output directory");
  cmd->add_option_function<std::string>("--engine", [&ov](const std::string& e) { ov.engine = e; },
                                        "coherent, fock or auto")
      ->check(CLI::IsMember({"coherent", "fock", "auto"}));
  cmd->add_option_function<std::string>(
         "--rwa", [&ov](const std::string& v) { ov.rwa = v == "on"; }, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option_function<std::string>(
         "--noise-mode", [&ov](const std::string& m) { ov.noise_mode = m; },
         "calibrated, literal or coherence")
      ->check(CLI::IsMember({"calibrated", "literal", "coherence"}));
  cmd->add_flag("-q,--quiet", ov.quiet, "No progress on stderr");
}

int report(const ampgate::ScenarioOutcome& o) {
  std::cout << "output   " << o.out_dir << '\n';
  for (const auto& f : o.outputs) std::cout << "  " << f << '\n';
  std::cout << "manifest " << o.manifest_path << '\n';
  for (const auto& f : o.failures) std::cerr << "failure: " << f << '\n';
  return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of parametrically amplified two-qubit gates"};
  app.set_version_flag("--version", ampgate::version_string());
  app.require_subcommand(1);

  ampgate::ScenarioOverrides ov;

  std::string config;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("config", config, "Scenario file (TOML)")->required();
  add_run_flags(run, ov);

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "Re-run the config embedded in a manifest.json");
  rerun->add_option("manifest", manifest, "manifest.json")->required();
  add_run_flags(rerun, ov);

  auto* check = app.add_subcommand("check", "Validate a scenario file and print the effective config");
  check->add_option("config", config, "Scenario file (TOML)")->required();
  add_run_flags(check, ov);

  double omega0_khz = 1.46, g_khz = 0.0, theta_over_2pi = 0.0;
  int loops = 1;
  auto* solve = app.add_subcommand("solve", "Print the gate design for one (g, theta)");
  solve->add_option("--omega0-khz", omega0_khz, "Rabi frequency / 2pi, kHz")->check(CLI::PositiveNumber);
  solve->add_option("--g-khz", g_khz, "Parametric drive strength / 2pi, kHz")->check(CLI::NonNegativeNumber);
  solve->add_option("--theta-over-2pi", theta_over_2pi, "Drive phase / 2pi");
  solve->add_option("--loops", loops, "Phase-space loops K")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ampgate::kExitConfigError;
  }

  try {
    if (*run) return report(ampgate::run_scenario(config, ov));
    if (*rerun) {
      const std::string text = ampgate::config_from_manifest(manifest);
      return report(ampgate::run_scenario_text(text, manifest + " (embedded config)", ov));
    }
    if (*check) {
      std::ifstream in(config);
      if (!in) throw ampgate::ConfigError(config, 0, "", "cannot read file");
      std::stringstream ss;
      ss << in.rdbuf();
      std::cout << ampgate::validate_scenario_text(ss.str(), config, ov);
      return ampgate::kExitOk;
    }
    if (*solve) {
      const auto s = ampgate::solve_gate(ampgate::khz_to_rad(omega0_khz), ampgate::khz_to_rad(g_khz),
                                         ampgate::kTwoPi * theta_over_2pi, ampgate::kPi / 2, loops);
      std::cout.precision(10);
      std::cout << "delta_khz        " << ampgate::rad_to_khz(s.delta) << '\n'
                << "delta_prime_khz  " << ampgate::rad_to_khz(s.delta_prime) << '\n'
                << "tau_us           " << s.tau * 1e6 << '\n'
                << "gain             " << s.gain << '\n'
                << "r                " << s.r << '\n';
      return ampgate::kExitOk;
    }
  } catch (const ampgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ampgate::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return ampgate::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ampgate::kExitNumericalFailure;
  }
  return ampgate::kExitOk;
}
