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

// hyperent: simulate and analyze a polarization x energy-time hyperentangled
// photon-pair campaign over DWDM channels.
//
//   hyperent <fringes|beta|tomo|budget> [--config FILE] [--seed N] [--out DIR]
//            [--format csv|json]
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 numerical non-convergence.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hyperent/campaign.hpp"
#include "hyperent/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace hyperent;
  CLI::App app{"Hyperentangled photon-pair campaign simulator"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "csv";
  app.add_option("--config", config_path, "Campaign configuration (JSON)");
  app.add_option("--seed", seed, "Master seed, overrides the configuration");
  app.add_option("--out", out_dir, "Output directory, overrides the configuration");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  const std::map<std::string, CommandResult (*)(const CampaignConfig&, OutputFormat)> commands{
      {"fringes", cmd_fringes}, {"beta", cmd_beta}, {"tomo", cmd_tomo}, {"budget", cmd_budget}};
  app.add_subcommand("fringes", "Coincidence surfaces and fringe visibilities for fixed Alice settings");
  app.add_subcommand("beta", "Generalized Bell operator scan, correlation table and per-channel summary");
  app.add_subcommand("tomo", "Maximum-likelihood tomography with a bootstrap fidelity interval");
  app.add_subcommand("budget", "Pair-rate and coincidence-rate budget with and without DWDM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    CampaignConfig config = config_path.empty() ? parse_config("{}") : load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = out_dir;
    const auto fmt = format == "json" ? OutputFormat::Json : OutputFormat::Csv;

    CommandResult result = commands.at(name)(config, fmt);
    result.artifacts.push_back({"resolved_config.json", resolved_config_json(config)});
    write_artifacts(std::filesystem::path(config.output_dir) / name, result.artifacts);
    std::cout << result.message << '\n';
    if (!result.converged) {
      std::cerr << "hyperent: " << name << ": numerical fit did not converge\n";
      return kExitNonConvergence;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "hyperent: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NonConvergence& e) {
    std::cerr << "hyperent: " << name << ": " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "hyperent: " << name << ": " << e.what() << '\n';
    return 1;
  }
}
