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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ampgate {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitPartialFailure = 4,
};

/// Problem in a scenario file, with the offending line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field,
              const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Command-line values that take precedence over the file.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<bool> rwa;
  std::optional<std::string> noise_mode;
  /// Worker threads. Never changes the results.
  int jobs = 1;
  /// Output directory; empty uses the file's `out` key, then ./out/<name>.
  std::string out_dir;
  bool quiet = false;
};

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::string out_dir;
  std::string manifest_path;
  std::vector<std::string> outputs;
  /// One entry per failed grid point, fit or sweep row.
  std::vector<std::string> failures;
};

/// Parses, validates and runs a scenario file, writing CSVs and manifest.json
/// into the output directory. Throws ConfigError for invalid input; numerical
/// trouble is reported through the exit code.
ScenarioOutcome run_scenario(const std::string& config_path, const ScenarioOverrides& overrides = {});

/// Same, for config text held in memory. `source` names it in diagnostics.
ScenarioOutcome run_scenario_text(const std::string& text, const std::string& source,
                                  const ScenarioOverrides& overrides = {});

/// Checks a scenario without running it; returns the effective config text.
std::string validate_scenario_text(const std::string& text, const std::string& source,
                                   const ScenarioOverrides& overrides = {});

/// The effective config embedded in a manifest written by run_scenario.
std::string config_from_manifest(const std::string& manifest_path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

const char* version_string();

}  // namespace ampgate
