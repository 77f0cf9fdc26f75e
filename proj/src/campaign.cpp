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


#include "hyperent/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>
#include <variant>

#include "json.hpp"

#include "hyperent/errors.hpp"
#include "hyperent/experiment.hpp"
#include "hyperent/tomography.hpp"

namespace hyperent {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- reading

// Walks one JSON object, type-checking the keys it is asked about and
// rejecting every key it was not.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "top level" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    out = convert<T>(*v, at(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

  Reader child(const char* key) {
    const json* v = find(key);
    static const json empty = json::object();
    return Reader(v == nullptr ? empty : *v, at(key));
  }

  const json* array(const char* key) {
    const json* v = find(key);
    if (v != nullptr && !v->is_array()) fail(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(at(k), "unknown key");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
      const auto x = v.get<std::int64_t>();
      if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) fail(where, "integer out of range");
      return static_cast<T>(x);
    } else {
      if (!v.is_number()) fail(where, "expected a number");
      return v.get<double>();
    }
  }

 private:
  const json* find(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Runs a library validator, reporting its complaint under `where`.
template <typename F>
void check(const std::string& where, F&& validate) {
  try {
    validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) Reader::fail(where, what);
}

void read_link(Reader r, LinkBudget& b) {
  r.get("transmission_db", b.transmission_db);
  r.get("singles_factor", b.singles_factor);
  r.get("coincidence_factor", b.coincidence_factor);
  r.get("coherence_time_ps", b.coherence_time_ps);
  r.get("channel_count", b.channel_count);
  r.get("multipair_fraction", b.multipair_fraction);
  r.finish();
}

void read_detector(Reader r, DetectorSpec& d) {
  r.get("efficiency", d.efficiency);
  r.get("timing_resolution_ps", d.timing_resolution_ps);
  r.get("saturation_cps", d.saturation_cps);
  r.finish();
}

std::vector<int> read_channels(Reader& r, const char* key, std::vector<int> fallback) {
  const json* a = r.array(key);
  if (a == nullptr) return fallback;
  std::vector<int> out;
  for (std::size_t k = 0; k < a->size(); ++k) {
    const std::string where = r.at(key) + "[" + std::to_string(k) + "]";
    out.push_back(Reader::convert<int>((*a)[k], where));
    check(where, [&] { pair_for(out.back()); });
  }
  require(!out.empty(), r.at(key), "needs at least one channel");
  return out;
}

std::size_t line_of(std::string_view text, std::size_t byte, std::size_t* column) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  *column = col;
  return line;
}

// ---------------------------------------------------------------- writing

std::string number(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

using Cell = std::variant<double, long long, std::string>;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + '"';
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::string render(OutputFormat format) const {
    if (format == OutputFormat::Csv) {
      std::string out;
      for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
      out += '\n';
      for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c) out += ',';
          if (const auto* d = std::get_if<double>(&row[c])) out += number(*d);
          else if (const auto* i = std::get_if<long long>(&row[c])) out += std::to_string(*i);
          else out += csv_field(std::get<std::string>(row[c]));
        }
        out += '\n';
      }
      return out;
    }
    ojson arr = ojson::array();
    for (const auto& row : rows) {
      ojson o;
      for (std::size_t c = 0; c < row.size(); ++c) std::visit([&](const auto& v) { o[columns[c]] = v; }, row[c]);
      arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
  }
};

std::string extension(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".json"; }

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

std::string counts_csv(const std::vector<CountRecord>& records) {
  std::ostringstream ss;
  write_counts_csv(ss, records);
  return ss.str();
}

RunPlan base_plan(const CampaignConfig& c, double integration_time_s, std::uint64_t seed, int channel) {
  RunPlan plan;
  plan.coincidence_rate_cps = c.coincidence_rate_cps;
  plan.dark_rate_cps = c.dark_counts_per_window / integration_time_s;
  plan.seed = seed;
  plan.channels = pair_for(channel);
  plan.analyzer = c.analyzer;
  return plan;
}

ojson link_json(const LinkBudget& b) {
  return {{"transmission_db", b.transmission_db},       {"singles_factor", b.singles_factor},
          {"coincidence_factor", b.coincidence_factor}, {"coherence_time_ps", b.coherence_time_ps},
          {"channel_count", b.channel_count},           {"multipair_fraction", b.multipair_fraction}};
}

ojson detector_json(const DetectorSpec& d) {
  return {{"efficiency", d.efficiency},
          {"timing_resolution_ps", d.timing_resolution_ps},
          {"saturation_cps", d.saturation_cps}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  const char* b = s.data();
  while (b < s.data() + s.size() && *b == ' ') ++b;
  const auto r = std::from_chars(b, s.data() + s.size(), x);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw ConfigError(where + ": bad number '" + s + "'");
  return x;
}

// Non-empty, non-comment lines of a small input file.
std::vector<std::pair<std::size_t, std::string>> data_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.emplace_back(n, line);
  }
  return out;
}

struct ChannelRow {
  int signal;
  double beta;
  double sigma;
};

std::vector<ChannelRow> read_summary_rows(const std::filesystem::path& path) {
  std::vector<ChannelRow> rows;
  for (const auto& [n, line] : data_lines(path)) {
    const std::string where = path.string() + ":" + std::to_string(n);
    const auto f = split_csv_line(line);
    if (f.size() == 3 && f[0] == "signal_channel") continue;  // header
    if (f.size() != 3) throw ConfigError(where + ": expected signal_channel,beta,sigma");
    const double ch = parse_double(f[0], where);
    if (ch != std::floor(ch)) throw ConfigError(where + ": channel must be an integer");
    rows.push_back({static_cast<int>(ch), parse_double(f[1], where), parse_double(f[2], where)});
    check(where, [&] { pair_for(rows.back().signal); });
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no rows");
  return rows;
}

std::filesystem::path resolve(const CampaignConfig& c, const std::string& file) {
  const std::filesystem::path p(file);
  return p.is_absolute() ? p : c.base_dir / p;
}

}  // namespace

// ---------------------------------------------------------------- config

SettingQuad BetaSection::quad() const {
  SettingQuad q;
  q.alpha_s_deg = alpha_s_deg;
  q.alpha_s_prime_deg = alpha_s_prime_deg;
  q.alpha_i_deg = alpha_i_deg;
  q.alpha_i_prime_deg = alpha_i_deg + 45.0;
  q.phi_s = phi_s;
  q.phi_s_prime = phi_s_prime;
  q.phi_i = phi_i;
  q.phi_i_prime = phi_i + std::numbers::pi / 2;
  return q;
}

BudgetSection::BudgetSection() {
  LinkBudget single;
  single.transmission_db = -10.0;
  single.coherence_time_ps = 1.0;
  single.channel_count = 1;
  const DetectorSpec current;
  const DetectorSpec best{0.9, 15.0, 150e6};
  scenarios = {{"dwdm_current_detectors", LinkBudget{}, current},
               {"single_channel_current_detectors", single, current},
               {"dwdm_best_detectors", LinkBudget{}, best},
               {"single_channel_best_detectors", single, best}};
  reference = single;
  detectors = {current, best};
}

DensityOperator CampaignConfig::density() const {
  if (state == "mixed") return DensityOperator::maximally_mixed(kHyperDim);
  return apply_noise(make_hyper_state(phase_sum), noise);
}

CampaignConfig parse_config(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t col = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, &col);
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  CampaignConfig c;
  Reader r(j, "");
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  {
    Reader s = r.child("state");
    s.get("kind", c.state);
    s.get("phase_sum", c.phase_sum);
    s.finish();
    require(c.state == "hyper" || c.state == "mixed", "state.kind", "expected \"hyper\" or \"mixed\"");
  }
  {
    Reader n = r.child("noise");
    n.get("phase_jitter_sigma", c.noise.phase_jitter_sigma);
    n.get("pump_imbalance", c.noise.pump_imbalance);
    n.get("white_noise_weight", c.noise.white_noise_weight);
    n.get("visibility_pol", c.noise.visibility_pol);
    n.get("visibility_et", c.noise.visibility_et);
    n.finish();
    check("noise", [&] { c.noise.validate(); });
  }
  {
    Reader a = r.child("analyzer");
    a.get("mi_imbalance_ps", c.analyzer.mi_imbalance_ps);
    a.get("mi_match_tolerance_ps", c.analyzer.mi_match_tolerance_ps);
    a.get("mi_mismatch_ps", c.analyzer.mi_mismatch_ps);
    a.get("coherence_time_ps", c.analyzer.coherence_time_ps);
    std::string conv = c.analyzer.pol_convention == PolConvention::Sum ? "sum" : "difference";
    a.get("pol_convention", conv);
    require(conv == "sum" || conv == "difference", "analyzer.pol_convention", "expected \"sum\" or \"difference\"");
    c.analyzer.pol_convention = conv == "sum" ? PolConvention::Sum : PolConvention::Difference;
    a.finish();
    check("analyzer", [&] { c.analyzer.validate(); });
  }
  {
    Reader k = r.child("counts");
    k.get("coincidence_rate_cps", c.coincidence_rate_cps);
    k.get("dark_counts_per_window", c.dark_counts_per_window);
    k.finish();
    require(c.coincidence_rate_cps > 0.0, "counts.coincidence_rate_cps", "must be positive");
    require(c.dark_counts_per_window >= 0.0, "counts.dark_counts_per_window", "must be >= 0");
  }
  {
    Reader f = r.child("fringes");
    f.get("grid", c.fringes.grid);
    f.get("integration_time_s", c.fringes.integration_time_s);
    f.get("channel", c.fringes.channel);
    if (const json* a = f.array("alice")) {
      c.fringes.alice.clear();
      for (std::size_t k = 0; k < a->size(); ++k) {
        Reader s((*a)[k], f.at("alice") + "[" + std::to_string(k) + "]");
        AliceSetting as;
        s.get("alpha_deg", as.alpha_deg);
        s.get("phi", as.phi);
        s.finish();
        c.fringes.alice.push_back(as);
      }
      require(!c.fringes.alice.empty(), "fringes.alice", "needs at least one setting");
    }
    f.finish();
    require(c.fringes.grid >= 5, "fringes.grid", "needs at least 5 points per axis");
    require(c.fringes.integration_time_s > 0.0, "fringes.integration_time_s", "must be positive");
    check("fringes.channel", [&] { pair_for(c.fringes.channel); });
  }
  {
    Reader b = r.child("beta");
    auto& s = c.beta;
    b.get("scan_grid", s.scan_grid);
    b.get("integration_time_s", s.integration_time_s);
    b.get("alpha_s_deg", s.alpha_s_deg);
    b.get("alpha_s_prime_deg", s.alpha_s_prime_deg);
    b.get("phi_s", s.phi_s);
    b.get("phi_s_prime", s.phi_s_prime);
    b.get("alpha_i_deg", s.alpha_i_deg);
    b.get("phi_i", s.phi_i);
    s.channels = read_channels(b, "channels", s.channels);
    b.get("table_file", s.table_file);
    b.get("summary_file", s.summary_file);
    b.finish();
    require(s.scan_grid >= 1, "beta.scan_grid", "must be positive");
    require(s.integration_time_s > 0.0, "beta.integration_time_s", "must be positive");
  }
  {
    Reader t = r.child("tomo");
    auto& s = c.tomo;
    t.get("measurement_set", s.measurement_set);
    t.get("integration_time_s", s.integration_time_s);
    t.get("resamples", s.resamples);
    t.get("tol", s.tol);
    t.get("max_iter", s.max_iter);
    t.finish();
    require(s.measurement_set == "pauli" || s.measurement_set == "bell", "tomo.measurement_set",
            "expected \"pauli\" or \"bell\"");
    require(s.integration_time_s > 0.0, "tomo.integration_time_s", "must be positive");
    require(s.resamples >= 100, "tomo.resamples", "must be >= 100");
    require(s.tol > 0.0, "tomo.tol", "must be positive");
    require(s.max_iter >= 1, "tomo.max_iter", "must be >= 1");
  }
  {
    Reader b = r.child("budget");
    auto& s = c.budget;
    if (const json* a = b.array("scenarios")) {
      s.scenarios.clear();
      for (std::size_t k = 0; k < a->size(); ++k) {
        const std::string where = b.at("scenarios") + "[" + std::to_string(k) + "]";
        Reader e((*a)[k], where);
        BudgetScenario sc;
        sc.name = "scenario_" + std::to_string(k);
        e.get("name", sc.name);
        read_link(e.child("link"), sc.link);
        read_detector(e.child("detector"), sc.detector);
        e.finish();
        check(where + ".link", [&] { sc.link.validate(); });
        check(where + ".detector", [&] { sc.detector.validate(); });
        s.scenarios.push_back(sc);
      }
    }
    s.channels = read_channels(b, "channels", s.channels);
    read_link(b.child("multiplexed"), s.multiplexed);
    read_link(b.child("reference"), s.reference);
    check("budget.multiplexed", [&] { s.multiplexed.validate(); });
    check("budget.reference", [&] { s.reference.validate(); });
    if (const json* a = b.array("detectors")) {
      s.detectors.clear();
      for (std::size_t k = 0; k < a->size(); ++k) {
        const std::string where = b.at("detectors") + "[" + std::to_string(k) + "]";
        DetectorSpec d;
        read_detector(Reader((*a)[k], where), d);
        check(where, [&] { d.validate(); });
        s.detectors.push_back(d);
      }
    }
    {
      Reader e = b.child("envelope");
      e.get("center_nm", s.envelope.center_nm);
      e.get("fwhm_nm", s.envelope.fwhm_nm);
      std::string shape = s.envelope.shape == EnvelopeShape::Gaussian ? "gaussian" : "sinc2";
      e.get("shape", shape);
      require(shape == "gaussian" || shape == "sinc2", "budget.envelope.shape", "expected \"gaussian\" or \"sinc2\"");
      s.envelope.shape = shape == "gaussian" ? EnvelopeShape::Gaussian : EnvelopeShape::Sinc2;
      e.finish();
      require(s.envelope.fwhm_nm > 0.0, "budget.envelope.fwhm_nm", "must be positive");
    }
    b.finish();
  }
  r.finish();
  return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto c = parse_config(text, path.string());
  c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return c;
}

std::string resolved_config_json(const CampaignConfig& c) {
  ojson j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["state"] = {{"kind", c.state}, {"phase_sum", c.phase_sum}};
  j["noise"] = {{"phase_jitter_sigma", c.noise.phase_jitter_sigma},
                {"pump_imbalance", c.noise.pump_imbalance},
                {"white_noise_weight", c.noise.white_noise_weight},
                {"visibility_pol", c.noise.visibility_pol},
                {"visibility_et", c.noise.visibility_et}};
  j["analyzer"] = {{"mi_imbalance_ps", c.analyzer.mi_imbalance_ps},
                   {"mi_match_tolerance_ps", c.analyzer.mi_match_tolerance_ps},
                   {"mi_mismatch_ps", c.analyzer.mi_mismatch_ps},
                   {"coherence_time_ps", c.analyzer.coherence_time_ps},
                   {"pol_convention", c.analyzer.pol_convention == PolConvention::Sum ? "sum" : "difference"}};
  j["counts"] = {{"coincidence_rate_cps", c.coincidence_rate_cps},
                 {"dark_counts_per_window", c.dark_counts_per_window}};
  ojson alice = ojson::array();
  for (const auto& a : c.fringes.alice) alice.push_back({{"alpha_deg", a.alpha_deg}, {"phi", a.phi}});
  j["fringes"] = {{"grid", c.fringes.grid},
                  {"integration_time_s", c.fringes.integration_time_s},
                  {"channel", c.fringes.channel},
                  {"alice", alice}};
  j["beta"] = {{"scan_grid", c.beta.scan_grid},
               {"integration_time_s", c.beta.integration_time_s},
               {"alpha_s_deg", c.beta.alpha_s_deg},
               {"alpha_s_prime_deg", c.beta.alpha_s_prime_deg},
               {"phi_s", c.beta.phi_s},
               {"phi_s_prime", c.beta.phi_s_prime},
               {"alpha_i_deg", c.beta.alpha_i_deg},
               {"phi_i", c.beta.phi_i},
               {"channels", c.beta.channels},
               {"table_file", c.beta.table_file},
               {"summary_file", c.beta.summary_file}};
  j["tomo"] = {{"measurement_set", c.tomo.measurement_set},
               {"integration_time_s", c.tomo.integration_time_s},
               {"resamples", c.tomo.resamples},
               {"tol", c.tomo.tol},
               {"max_iter", c.tomo.max_iter}};
  ojson scenarios = ojson::array();
  for (const auto& s : c.budget.scenarios)
    scenarios.push_back({{"name", s.name}, {"link", link_json(s.link)}, {"detector", detector_json(s.detector)}});
  ojson detectors = ojson::array();
  for (const auto& d : c.budget.detectors) detectors.push_back(detector_json(d));
  j["budget"] = {{"scenarios", scenarios},
                 {"channels", c.budget.channels},
                 {"multiplexed", link_json(c.budget.multiplexed)},
                 {"reference", link_json(c.budget.reference)},
                 {"detectors", detectors},
                 {"envelope",
                  {{"center_nm", c.budget.envelope.center_nm},
                   {"fwhm_nm", c.budget.envelope.fwhm_nm},
                   {"shape", c.budget.envelope.shape == EnvelopeShape::Gaussian ? "gaussian" : "sinc2"}}}};
  return dump(j);
}

CorrelationTable read_correlation_table(const std::filesystem::path& path) {
  CorrelationTable t{};
  std::size_t row = 0;
  for (const auto& [n, line] : data_lines(path)) {
    const std::string where = path.string() + ":" + std::to_string(n);
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw ConfigError(where + ": expected 4 comma-separated correlators");
    if (row == 4) throw ConfigError(where + ": more than 4 rows");
    for (std::size_t c = 0; c < 4; ++c) {
      t[row][c] = parse_double(f[c], where);
      if (std::abs(t[row][c]) > 1.0) throw ConfigError(where + ": correlator outside [-1, 1]");
    }
    ++row;
  }
  if (row != 4) throw ConfigError(path.string() + ": expected 4 rows, found " + std::to_string(row));
  return t;
}

// ---------------------------------------------------------------- commands

CommandResult cmd_fringes(const CampaignConfig& c, OutputFormat format) {
  const auto rho = c.density();
  const auto& f = c.fringes;
  std::vector<CountRecord> all;
  Table fits{{"alpha_s_deg", "phi_s_rad", "amplitude", "visibility_pol", "visibility_et", "alpha_offset_deg",
              "phase_offset_rad", "residual", "iterations"},
             {}};
  ojson surfaces = ojson::array();
  double v_pol = 0.0, v_et = 0.0;
  for (std::size_t k = 0; k < f.alice.size(); ++k) {
    RunPlan plan = base_plan(c, f.integration_time_s, substream_seed(c.seed, k), f.channel);
    for (int a = 0; a < f.grid; ++a)
      for (int p = 0; p < f.grid; ++p)
        plan.measurements.push_back({JointSetting::from_angles(f.alice[k].alpha_deg, 180.0 * a / f.grid,
                                                               f.alice[k].phi, 2 * std::numbers::pi * p / f.grid),
                                     kAllPlus, f.integration_time_s});
    const auto records = simulate_counts(rho, plan);
    const auto fit = fit_fringes(fringe_points(records));
    all.insert(all.end(), records.begin(), records.end());
    fits.rows.push_back({f.alice[k].alpha_deg, f.alice[k].phi, fit.amplitude, fit.visibility_pol, fit.visibility_et,
                         fit.alpha_offset_deg, fit.phase_offset, fit.residual, static_cast<long long>(fit.iterations)});
    surfaces.push_back({{"alpha_s_deg", f.alice[k].alpha_deg},
                        {"phi_s_rad", f.alice[k].phi},
                        {"visibility_pol", fit.visibility_pol},
                        {"visibility_et", fit.visibility_et}});
    v_pol += fit.visibility_pol / static_cast<double>(f.alice.size());
    v_et += fit.visibility_et / static_cast<double>(f.alice.size());
  }
  ojson summary;
  summary["command"] = "fringes";
  summary["channels"] = pair_for(f.channel).label();
  summary["points_per_surface"] = f.grid * f.grid;
  summary["surfaces"] = surfaces;
  summary["mean_visibility_pol"] = v_pol;
  summary["mean_visibility_et"] = v_et;

  CommandResult out;
  out.artifacts = {{"fringes_counts.csv", counts_csv(all)},
                   {"fringes_fit" + extension(format), fits.render(format)},
                   {"fringes_summary.json", dump(summary)}};
  out.message = "fringes: mean V_pol = " + number(v_pol) + ", V_et = " + number(v_et);
  return out;
}

CommandResult cmd_beta(const CampaignConfig& c, OutputFormat format) {
  const auto rho = c.density();
  const auto& b = c.beta;
  const SettingQuad quad = b.quad();
  CommandResult out;
  ojson summary;
  summary["command"] = "beta";

  // Exact <beta> over Bob's grid.
  std::vector<double> alphas, phis;
  for (int k = 0; k < b.scan_grid; ++k) {
    alphas.push_back(180.0 * k / b.scan_grid);
    phis.push_back(2 * std::numbers::pi * k / b.scan_grid);
  }
  BetaScanOptions so;
  so.alpha_s_deg = b.alpha_s_deg;
  so.alpha_s_prime_deg = b.alpha_s_prime_deg;
  so.phi_s = b.phi_s;
  so.phi_s_prime = b.phi_s_prime;
  const auto surface = beta_scan(rho, alphas, phis, so, c.analyzer);
  Table scan{{"alpha_i_deg", "phi_i_rad", "beta"}, {}};
  for (std::size_t a = 0; a < alphas.size(); ++a)
    for (std::size_t p = 0; p < phis.size(); ++p) scan.rows.push_back({alphas[a], phis[p], surface.at(a, p)});
  summary["scan"] = {{"grid", b.scan_grid},
                     {"max_beta", surface.max_value},
                     {"argmax_alpha_i_deg", surface.argmax_alpha_deg},
                     {"argmax_phi_i_rad", surface.argmax_phi}};
  out.artifacts.push_back({"beta_scan" + extension(format), scan.render(format)});

  // Correlation table at the configured quad.
  static const char* kRowNames[4] = {"phi_s,phi_i", "phi_s,phi_i'", "phi_s',phi_i", "phi_s',phi_i'"};
  static const char* kColNames[4] = {"alpha_s,alpha_i", "alpha_s,alpha_i'", "alpha_s',alpha_i", "alpha_s',alpha_i'"};
  Table corr{{"phase_settings", "polarization_settings", "E", "sigma"}, {}};
  std::vector<CountRecord> records;
  CorrelationTable table{};
  if (!b.table_file.empty()) {
    table = read_correlation_table(resolve(c, b.table_file));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t k = 0; k < 4; ++k)
        corr.rows.push_back({std::string(kRowNames[r]), std::string(kColNames[k]), table[r][k], std::string()});
    summary["table"] = {{"source", b.table_file}, {"beta", generalized_beta(table)}};
  }

  // One row per channel pair.
  Table channels{{"signal_channel", "idler_channel", "beta", "sigma", "violation_sigmas", "printed_sigmas"}, {}};
  ojson rows = ojson::array();
  auto add_row = [&](const ChannelPair& pair, double beta, double sigma) {
    const double v = violation_sigmas(beta, sigma);
    const auto printed = static_cast<long long>(std::floor(v));
    channels.rows.push_back({static_cast<long long>(pair.signal.number()), static_cast<long long>(pair.idler.number()),
                             beta, sigma, v, printed});
    rows.push_back({{"channels", pair.label()},
                    {"beta", beta},
                    {"sigma", sigma},
                    {"violation_sigmas", v},
                    {"printed_sigmas", printed}});
  };
  if (!b.summary_file.empty()) {
    for (const auto& row : read_summary_rows(resolve(c, b.summary_file))) add_row(pair_for(row.signal), row.beta, row.sigma);
    summary["channels_source"] = b.summary_file;
  } else {
    for (std::size_t k = 0; k < b.channels.size(); ++k) {
      RunPlan plan = base_plan(c, b.integration_time_s, substream_seed(c.seed, k), b.channels[k]);
      plan.measurements = filter_sweep(quad, b.integration_time_s);
      auto rec = simulate_counts(rho, plan);
      const auto est = expand_filter_counts(rec, quad);
      add_row(plan.channels, est.beta(), est.beta_sigma());
      if (k == 0) {
        summary["marginal_chsh"] = {{"polarization", est.marginal_chsh(Dof::Pol)},
                                    {"energy_time", est.marginal_chsh(Dof::EnergyTime)}};
        if (b.table_file.empty()) {
          for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t col = 0; col < 4; ++col)
              corr.rows.push_back({std::string(kRowNames[r]), std::string(kColNames[col]), est.correlators[r][col],
                                   est.sigma[r][col]});
          summary["table"] = {{"source", "simulated " + plan.channels.label()},
                              {"beta", est.beta()},
                              {"sigma", est.beta_sigma()}};
        }
      }
      records.insert(records.end(), rec.begin(), rec.end());
    }
  }
  summary["channels"] = rows;
  if (!corr.rows.empty()) out.artifacts.push_back({"beta_table" + extension(format), corr.render(format)});
  out.artifacts.push_back({"beta_channels" + extension(format), channels.render(format)});
  if (!records.empty()) out.artifacts.push_back({"beta_counts.csv", counts_csv(records)});
  out.artifacts.push_back({"beta_summary.json", dump(summary)});
  out.message = "beta: scan max = " + number(surface.max_value);
  if (summary.contains("table")) out.message += ", table beta = " + number(summary["table"]["beta"].get<double>());
  return out;
}

CommandResult cmd_tomo(const CampaignConfig& c, OutputFormat format) {
  const auto rho = c.density();
  const auto& t = c.tomo;
  RunPlan plan = base_plan(c, t.integration_time_s, substream_seed(c.seed, 0), c.fringes.channel);
  plan.measurements = t.measurement_set == "pauli" ? pauli_tomography_plan(t.integration_time_s)
                                                   : filter_sweep(c.beta.quad(), t.integration_time_s);
  const auto records = simulate_counts(rho, plan);
  const auto net = dataset_from_records(records, c.coincidence_rate_cps, true, c.analyzer);
  const auto raw = dataset_from_records(records, c.coincidence_rate_cps, false, c.analyzer);
  MleOptions mo;
  mo.tol = t.tol;
  mo.max_iter = t.max_iter;
  mo.allow_reduced_rank = t.measurement_set == "bell";
  const auto fit = mle_reconstruct(net, mo);
  const auto fit_raw = mle_reconstruct(raw, mo);
  const auto target = make_hyper_state(c.phase_sum);

  CommandResult out;
  out.converged = fit.converged && fit_raw.converged;
  ojson summary;
  summary["command"] = "tomo";
  summary["measurement_set"] = t.measurement_set;
  summary["entries"] = net.entries.size();
  summary["total_counts"] = net.total_count();
  summary["informationally_complete"] = fit.informationally_complete;
  summary["converged"] = out.converged;
  summary["iterations"] = fit.iterations;
  summary["log_likelihood"] = fit.log_likelihood;
  summary["residual"] = fit.residual;
  summary["fidelity"] = fidelity(fit.rho_hat, target);
  summary["fidelity_without_dark_subtraction"] = fidelity(fit_raw.rho_hat, target);

  std::ostringstream matrix;
  write_matrix(matrix, fit.rho_hat.matrix());
  out.artifacts = {{"tomo_counts.csv", counts_csv(records)}, {"rho_hat.txt", matrix.str()}};
  if (fit.converged) {
    BootstrapOptions bo;
    bo.resamples = t.resamples;
    bo.seed = substream_seed(c.seed, 1);
    bo.mle = mo;
    const auto iv = bootstrap_fidelity(net, fit, target, bo);
    summary["interval"] = {{"low", iv.low}, {"high", iv.high}, {"width", iv.high - iv.low}};
    summary["resamples"] = t.resamples;
    summary["failed_resamples"] = iv.failed;
    Table boot{{"resample", "fidelity"}, {}};
    for (std::size_t k = 0; k < iv.fidelities.size(); ++k)
      boot.rows.push_back({static_cast<long long>(k), iv.fidelities[k]});
    out.artifacts.push_back({"tomo_bootstrap" + extension(format), boot.render(format)});
    out.message = "tomo: F = " + number(summary["fidelity"].get<double>()) + ", interval [" + number(iv.low) + ", " +
                  number(iv.high) + "]";
  } else {
    out.message = "tomo: maximum-likelihood fit did not converge";
  }
  out.artifacts.push_back({"tomo_summary.json", dump(summary)});
  return out;
}

CommandResult cmd_budget(const CampaignConfig& c, OutputFormat format) {
  const auto& b = c.budget;
  Table scen{{"name", "transmission_db", "coherence_time_ps", "channel_count", "efficiency", "timing_resolution_ps",
              "saturation_cps", "pair_rate", "binding_constraint", "singles_rate_cps", "coincidence_rate_cps"},
             {}};
  ojson scenarios = ojson::array();
  for (const auto& s : b.scenarios) {
    const auto lim = max_pair_rate(s.link, s.detector);
    const double singles = singles_rate(lim.rate, s.link, s.detector);
    const double coinc = coincidence_rate(lim.rate, s.link, s.detector);
    scen.rows.push_back({s.name, s.link.transmission_db, s.link.coherence_time_ps,
                         static_cast<long long>(s.link.channel_count), s.detector.efficiency,
                         s.detector.timing_resolution_ps, s.detector.saturation_cps, lim.rate,
                         std::string(to_string(lim.binding)), singles, coinc});
    scenarios.push_back({{"name", s.name},
                         {"pair_rate", lim.rate},
                         {"binding_constraint", to_string(lim.binding)},
                         {"singles_rate_cps", singles},
                         {"coincidence_rate_cps", coinc}});
  }
  std::vector<ChannelPair> pairs;
  for (int ch : b.channels) pairs.push_back(pair_for(ch));
  Table agg{{"detector", "channels", "pair_rate", "binding_constraint", "coincidence_rate_cps", "spectrum_weight"}, {}};
  ojson aggregates = ojson::array();
  for (std::size_t d = 0; d < b.detectors.size(); ++d) {
    const auto rep = aggregate_capacity(pairs, b.multiplexed, b.reference, b.detectors[d], b.envelope);
    for (const auto& p : rep.per_pair)
      agg.rows.push_back({static_cast<long long>(d), p.pair.label(), p.pair_rate, std::string(to_string(p.binding)),
                          p.coincidence_rate, p.spectrum_weight});
    aggregates.push_back({{"detector", detector_json(b.detectors[d])},
                          {"total_coincidence_rate_cps", rep.total_coincidence_rate},
                          {"reference_coincidence_rate_cps", rep.reference_coincidence_rate},
                          {"reference_binding_constraint", to_string(rep.reference_limit.binding)},
                          {"ratio", rep.ratio},
                          {"extra_loss_db", rep.extra_loss_db},
                          {"asymptotic_ratio", rep.asymptotic_ratio}});
  }
  ojson summary;
  summary["command"] = "budget";
  summary["scenarios"] = scenarios;
  summary["aggregates"] = aggregates;
  CommandResult out;
  out.artifacts = {{"budget_scenarios" + extension(format), scen.render(format)},
                   {"budget_channels" + extension(format), agg.render(format)},
                   {"budget_summary.json", dump(summary)}};
  out.message = "budget: " + std::to_string(b.scenarios.size()) + " scenarios, " + std::to_string(pairs.size()) +
                " channel pairs";
  return out;
}

void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  std::filesystem::create_directories(dir);
  for (const auto& a : artifacts) {
    const auto target = dir / a.name;
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp.string());
      out << a.content;
      out.flush();
      if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }
}

}  // namespace hyperent
