// Copyright 2026 The hyperent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Campaign configuration and the four commands behind the command-line
// tool.  Commands return their output files as in-memory artifacts; writing
// them is a separate, atomic step.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hyperent/dwdm.hpp"
#include "hyperent/hilbert.hpp"
#include "hyperent/measurement.hpp"

namespace hyperent {

struct AliceSetting {
  double alpha_deg = 0.0;
  double phi = 0.0;
};

struct FringesSection {
  int grid = 16;  // Bob's alpha and phi points
  int channel = 10;  // signal channel of the measured pair
  double integration_time_s = 4.0;
  std::vector<AliceSetting> alice{{0.0, 0.0}, {0.0, 1.5707963267948966}, {45.0, 0.0}, {45.0, 1.5707963267948966}};
};

struct BetaSection {
  int scan_grid = 96;
  double integration_time_s = 1.0;
  double alpha_s_deg = 0.0;
  double alpha_s_prime_deg = 45.0;
  double phi_s = 0.0;
  double phi_s_prime = 1.5707963267948966;
  double alpha_i_deg = 22.5;
  double phi_i = 0.7853981633974483;
  std::vector<int> channels{10, 11, 12, 13, 14};  // signal channel numbers
  // Measured inputs instead of simulation: a 4x4 correlation table (CSV,
  // rows = phase pairs) and per-channel "signal_channel,beta,sigma" rows.
  std::string table_file;
  std::string summary_file;

  SettingQuad quad() const;
};

struct TomoSection {
  std::string measurement_set = "pauli";  // "pauli" or "bell"
  double integration_time_s = 1.0;
  int resamples = 200;
  double tol = 1e-10;
  long max_iter = 100000;
};

struct BudgetScenario {
  std::string name;
  LinkBudget link;
  DetectorSpec detector;
};

struct BudgetSection {
  std::vector<BudgetScenario> scenarios;  // defaults: current and best detectors, with and without DWDM
  std::vector<int> channels{10, 11, 12, 13, 14};
  LinkBudget multiplexed;
  LinkBudget reference;
  std::vector<DetectorSpec> detectors;
  SpectralEnvelope envelope;

  BudgetSection();
};

struct CampaignConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string state = "hyper";  // "hyper" or "mixed"
  double phase_sum = 0.0;
  NoiseModel noise;
  AnalyzerConfig analyzer;
  double coincidence_rate_cps = 1600.0;  // all 16 outcomes of one setting
  double dark_counts_per_window = 20.0;
  FringesSection fringes;
  BetaSection beta;
  TomoSection tomo;
  BudgetSection budget;
  std::filesystem::path base_dir = ".";  // relative input files resolve here

  DensityOperator density() const;
};

/// Parses JSON text.  Unknown keys, wrong types and out-of-range values
/// throw ConfigError naming "<source>:<line>:<col>" or the field path.
CampaignConfig parse_config(std::string_view text, const std::string& source = "<config>");
CampaignConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included, as formatted JSON.
std::string resolved_config_json(const CampaignConfig& config);

enum class OutputFormat { Csv, Json };

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<Artifact> artifacts;
  bool converged = true;
  std::string message;  // one-line human summary
};

CommandResult cmd_fringes(const CampaignConfig& config, OutputFormat format = OutputFormat::Csv);
CommandResult cmd_beta(const CampaignConfig& config, OutputFormat format = OutputFormat::Csv);
CommandResult cmd_tomo(const CampaignConfig& config, OutputFormat format = OutputFormat::Csv);
CommandResult cmd_budget(const CampaignConfig& config, OutputFormat format = OutputFormat::Csv);

/// Writes each artifact to dir/name through a temporary file and rename.
void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts);

/// Reads a 4x4 correlation table; '#' lines and blank lines are skipped.
CorrelationTable read_correlation_table(const std::filesystem::path& path);

}  // namespace hyperent
