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

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "hyperent/campaign.hpp"
#include "hyperent/errors.hpp"
#include "json.hpp"

using namespace hyperent;
using Catch::Approx;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
const std::filesystem::path kConfigs = HYPERENT_CONFIG_DIR;

const std::string& artifact(const CommandResult& r, const std::string& name) {
  for (const auto& a : r.artifacts)
    if (a.name == name) return a.content;
  FAIL("missing artifact " << name);
  static const std::string none;
  return none;
}

json summary(const CommandResult& r, const std::string& name) { return json::parse(artifact(r, name)); }

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hyperent_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Rounds to the number of significant digits the reference figure carries.
double printed(double x, int digits) {
  const double scale = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(x))));
  return std::round(x * scale) / scale;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYPERENT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config defaults and resolved round trip") {
  const auto c = parse_config("{}");
  CHECK(c.seed == 1);
  CHECK(c.state == "hyper");
  CHECK(c.beta.channels.size() == 5);
  CHECK(c.budget.scenarios.size() == 4);
  const std::string resolved = resolved_config_json(c);
  CHECK(resolved_config_json(parse_config(resolved)) == resolved);

  const auto p = load_config(kConfigs / "measured_v098.json");
  CHECK(p.noise.visibility_pol == 0.98);
  CHECK(resolved_config_json(parse_config(resolved_config_json(p))) == resolved_config_json(p));
}

TEST_CASE("config errors name the offending field") {
  CHECK_THAT(config_error(R"({"sed": 3})"), Catch::Matchers::ContainsSubstring("sed"));
  CHECK_THAT(config_error(R"({"noise": {"visibility": 0.9}})"),
             Catch::Matchers::ContainsSubstring("noise.visibility"));
  CHECK_THAT(config_error(R"({"seed": "one"})"), Catch::Matchers::ContainsSubstring("seed"));
  CHECK_THAT(config_error(R"({"noise": {"visibility_pol": 1.5}})"),
             Catch::Matchers::ContainsSubstring("noise"));
  CHECK_THAT(config_error(R"({"state": {"kind": "werner"}})"), Catch::Matchers::ContainsSubstring("state.kind"));
  CHECK_THAT(config_error(R"({"tomo": {"resamples": 10}})"), Catch::Matchers::ContainsSubstring("tomo.resamples"));
  CHECK_THAT(config_error(R"({"fringes": {"channel": 50}})"), Catch::Matchers::ContainsSubstring("fringes.channel"));
  CHECK_THAT(config_error(R"({"budget": {"detectors": [{"efficiency": 2}]}})"),
             Catch::Matchers::ContainsSubstring("budget.detectors[0]"));
  CHECK_THAT(config_error("{\n  \"seed\": 1,\n  oops\n}"), Catch::Matchers::ContainsSubstring("cfg.json:3:"));
  CHECK_THROWS_AS(load_config(kConfigs / "does_not_exist.json"), ConfigError);
}

TEST_CASE("correlation table files") {
  const auto t = read_correlation_table(kConfigs / "correlators_itu10.csv");
  CHECK(t[0][0] == 0.51);
  CHECK(t[3][0] == -0.69);
  const auto dir = scratch("table");
  std::ofstream(dir / "short.csv") << "0.1,0.2,0.3,0.4\n";
  CHECK_THROWS_AS(read_correlation_table(dir / "short.csv"), ConfigError);
  std::ofstream(dir / "big.csv") << "1.5,0,0,0\n0,0,0,0\n0,0,0,0\n0,0,0,0\n";
  CHECK_THROWS_AS(read_correlation_table(dir / "big.csv"), ConfigError);
}

TEST_CASE("beta on measured correlation inputs") {
  const auto r = cmd_beta(load_config(kConfigs / "measured_v098.json"));
  const auto s = summary(r, "beta_summary.json");
  CHECK(s["table"]["beta"].get<double>() == Approx(7.74).margin(1e-12));
  const int expected[] = {31, 27, 30, 32, 29};
  REQUIRE(s["channels"].size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(s["channels"][k]["printed_sigmas"].get<int>() == expected[k]);
  // V = 0.98 in both degrees of freedom scales the optimum to 8 V^2.
  CHECK(s["scan"]["max_beta"].get<double>() == Approx(8 * 0.98 * 0.98).margin(1e-9));
  CHECK_THAT(artifact(r, "beta_table.csv"), Catch::Matchers::StartsWith("phase_settings,polarization_settings,E,sigma\n"
                                                                        "\"phi_s,phi_i\",\"alpha_s,alpha_i\",0.51,"));
}

TEST_CASE("beta scan of the ideal and mixed states") {
  auto c = load_config(kConfigs / "noiseless.json");
  auto s = summary(cmd_beta(c), "beta_summary.json");
  CHECK(s["scan"]["max_beta"].get<double>() == Approx(8.0).margin(1e-9));
  CHECK(s["scan"]["argmax_alpha_i_deg"].get<double>() == Approx(22.5).margin(1e-12));
  CHECK(s["scan"]["argmax_phi_i_rad"].get<double>() == Approx(kPi / 4).margin(1e-12));
  // Simulated channels at 1600 cps and 1 s: beta near 8 with sigma about 0.1.
  for (const auto& row : s["channels"]) {
    CHECK(row["beta"].get<double>() == Approx(8.0).margin(0.5));
    CHECK(row["sigma"].get<double>() == Approx(0.1).margin(0.05));
  }

  c = load_config(kConfigs / "mixed.json");
  s = summary(cmd_beta(c), "beta_summary.json");
  CHECK(std::abs(s["scan"]["max_beta"].get<double>()) < 1e-12);
}

TEST_CASE("budget reference scenarios") {
  const auto r = cmd_budget(parse_config("{}"), OutputFormat::Json);
  const auto s = summary(r, "budget_summary.json");
  const double rates[] = {8e6, 4e6, 3.3e9, 3.3e9};
  const int digits[] = {1, 1, 2, 2};
  const double coinc[] = {100, 200, 0.83e6, 3.4e6};
  const char* binding[] = {"saturation", "saturation", "timing_resolution", "timing_resolution"};
  REQUIRE(s["scenarios"].size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& sc = s["scenarios"][k];
    CHECK(printed(sc["pair_rate"].get<double>(), digits[k]) == Approx(rates[k]).epsilon(1e-12));
    CHECK(sc["coincidence_rate_cps"].get<double>() == Approx(coinc[k]).epsilon(0.05));
    CHECK(sc["binding_constraint"] == binding[k]);
  }
  CHECK(s["aggregates"][0]["ratio"].get<double>() == Approx(2.5).epsilon(0.01));
  CHECK(s["aggregates"][0]["asymptotic_ratio"].get<double>() == Approx(5 / std::pow(10.0, 0.6)).epsilon(1e-12));
  CHECK(json::parse(artifact(r, "budget_scenarios.json")).size() == 4);
}

TEST_CASE("fringes recover the planted visibilities") {
  auto c = load_config(kConfigs / "noiseless.json");
  c.coincidence_rate_cps = 1e9;
  auto s = summary(cmd_fringes(c), "fringes_summary.json");
  CHECK(s["mean_visibility_pol"].get<double>() == Approx(1.0).margin(1e-3));
  CHECK(s["mean_visibility_et"].get<double>() == Approx(1.0).margin(1e-3));

  s = summary(cmd_fringes(load_config(kConfigs / "measured_v098.json")), "fringes_summary.json");
  CHECK(s["points_per_surface"] == 256);
  CHECK(s["mean_visibility_pol"].get<double>() == Approx(0.98).margin(0.015));
  CHECK(s["mean_visibility_et"].get<double>() == Approx(0.98).margin(0.015));

  c = load_config(kConfigs / "mixed.json");
  c.coincidence_rate_cps = 1e9;
  s = summary(cmd_fringes(c), "fringes_summary.json");
  CHECK(s["mean_visibility_pol"].get<double>() < 1e-3);
  CHECK(s["mean_visibility_et"].get<double>() < 1e-3);
}

TEST_CASE("tomography command") {
  auto c = load_config(kConfigs / "measured_v098.json");
  c.coincidence_rate_cps = 1e4;
  c.dark_counts_per_window = 0;
  c.tomo.resamples = 100;
  const auto r = cmd_tomo(c);
  REQUIRE(r.converged);
  const auto s = summary(r, "tomo_summary.json");
  CHECK(s["informationally_complete"] == true);
  CHECK(s["entries"] == 81 * 16);
  // The planted state's fidelity with the ideal target.
  const double v = 0.98;
  const double truth = (1 + 3 * v) * (1 + 3 * v) / 16;
  CHECK(s["fidelity"].get<double>() == Approx(truth).margin(0.005));
  CHECK(s["interval"]["low"].get<double>() < s["interval"]["high"].get<double>());
  CHECK(s["interval"]["width"].get<double>() < 0.02);
  CHECK(s["failed_resamples"] == 0);
  CHECK_THAT(artifact(r, "rho_hat.txt"), Catch::Matchers::ContainsSubstring(","));
}

TEST_CASE("commands are deterministic in the seed") {
  auto c = load_config(kConfigs / "measured_v098.json");
  const auto a = cmd_fringes(c);
  const auto b = cmd_fringes(c);
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t k = 0; k < a.artifacts.size(); ++k) CHECK(a.artifacts[k].content == b.artifacts[k].content);
  c.seed += 1;
  CHECK(cmd_fringes(c).artifacts[0].content != a.artifacts[0].content);
}

TEST_CASE("artifacts are written whole") {
  const auto dir = scratch("write") / "nested";
  write_artifacts(dir, {{"a.txt", "alpha\n"}, {"b.csv", "x,y\n"}});
  std::ifstream in(dir / "a.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "alpha\n");
  for (const auto& e : std::filesystem::directory_iterator(dir))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
}

TEST_CASE("command-line exit codes") {
  const auto out = scratch("cli");
  const std::string measured = (kConfigs / "measured_v098.json").string();
  CHECK(run_cli("budget --out " + out.string()) == 0);
  CHECK(std::filesystem::exists(out / "budget" / "budget_summary.json"));
  CHECK(std::filesystem::exists(out / "budget" / "resolved_config.json"));
  CHECK(run_cli("beta --config " + measured + " --format json --out " + out.string()) == 0);
  CHECK(std::filesystem::exists(out / "beta" / "beta_scan.json"));

  std::ofstream(out / "bad.json") << R"({"noise": {"visibility_pol": 3}})";
  CHECK(run_cli("beta --config " + (out / "bad.json").string()) == 2);
  CHECK(run_cli("beta --config " + (out / "missing.json").string()) == 2);
  CHECK(run_cli("beta --format xml") == 2);
  CHECK(run_cli("frobnicate") == 2);

  std::ofstream(out / "slow.json") << R"({"tomo": {"max_iter": 2}, "output_dir": ")" + out.string() + "\"}";
  CHECK(run_cli("tomo --config " + (out / "slow.json").string()) == 3);
}
