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

#include "hyperent/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "hyperent/errors.hpp"

namespace hyperent {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint64_t> d(mean);
  return d(rng);
}

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  return r >= period ? 0.0 : r;
}

}  // namespace

double subtract_dark(const CountRecord& record) {
  return std::max(0.0, static_cast<double>(record.raw) - record.expected_dark);
}

void RunPlan::validate() const {
  if (!(coincidence_rate_cps >= 0.0) || !std::isfinite(coincidence_rate_cps))
    throw InvalidParameter("coincidence rate must be finite and non-negative");
  if (!(dark_rate_cps >= 0.0) || !std::isfinite(dark_rate_cps))
    throw InvalidParameter("dark rate must be finite and non-negative");
  for (const auto& m : measurements)
    if (!(m.integration_time_s >= 0.0) || !std::isfinite(m.integration_time_s))
      throw InvalidParameter("integration time must be finite and non-negative");
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL));
}

std::vector<double> expected_counts(const DensityOperator& rho, const RunPlan& plan) {
  plan.validate();
  std::vector<double> out;
  out.reserve(plan.measurements.size());
  for (const auto& m : plan.measurements) {
    const double p = std::max(0.0, coincidence_probability(rho, m.setting, m.outcomes, plan.analyzer));
    out.push_back(plan.coincidence_rate_cps * p * m.integration_time_s);
  }
  return out;
}

std::vector<CountRecord> simulate_counts(const DensityOperator& rho, const RunPlan& plan) {
  const auto means = expected_counts(rho, plan);
  std::vector<CountRecord> out;
  out.reserve(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) {
    const auto& m = plan.measurements[k];
    std::mt19937_64 rng(substream_seed(plan.seed, k));
    const double dark_mean = plan.dark_rate_cps * m.integration_time_s;
    const std::uint64_t signal = poisson(rng, means[k]);
    const std::uint64_t dark = poisson(rng, dark_mean);
    out.push_back({m.setting, m.outcomes, m.integration_time_s, signal + dark, dark, dark_mean, plan.channels});
  }
  return out;
}

JointSetting flip_to_plus(const JointSetting& setting, const OutcomeTuple& outcomes) {
  JointSetting s = setting;
  auto flip = [](LocalSetting& local, Outcome pol, Outcome et) {
    if (pol == Outcome::Minus) {
      if (local.pol_mode != PolMode::Linear)
        throw InvalidParameter("flip_to_plus: only linear polarization analyzers can be rotated");
      local.alpha_deg += 90.0;
    }
    if (et == Outcome::Minus) {
      if (local.et_mode != EtMode::CentralSlot)
        throw InvalidParameter("flip_to_plus: only central-slot phase analyzers can be shifted");
      local.phi += kPi;
    }
  };
  flip(s.signal, outcomes[0], outcomes[1]);
  flip(s.idler, outcomes[2], outcomes[3]);
  return s.normalized();
}

std::vector<PlannedMeasurement> filter_sweep(const SettingQuad& quad, double integration_time_s) {
  std::vector<PlannedMeasurement> out;
  out.reserve(256);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      for (const auto& o : all_outcome_tuples())
        out.push_back({flip_to_plus(quad.at(r, c), o), kAllPlus, integration_time_s});
  return out;
}

double FilterEstimate::beta(const SignPattern& rows, const SignPattern& cols) const {
  return generalized_beta(correlators, rows, cols);
}

double FilterEstimate::beta_sigma() const {
  double var = 0.0;
  for (const auto& row : sigma)
    for (double s : row) var += s * s;
  return std::sqrt(var);
}

double FilterEstimate::marginal_chsh(Dof dof, const SignPattern& signs) const {
  std::array<double, 4> averaged{};
  for (std::size_t k = 0; k < 4; ++k) {
    double acc = 0.0;
    for (std::size_t other = 0; other < 4; ++other)
      acc += dof == Dof::EnergyTime ? et_correlators[k][other] : pol_correlators[other][k];
    averaged[k] = acc / 4.0;
  }
  return chsh(averaged, signs);
}

FilterEstimate expand_filter_counts(const std::vector<CountRecord>& records, const SettingQuad& quad,
                                    bool dark_subtracted) {
  std::vector<const CountRecord*> plus;
  for (const auto& r : records)
    if (r.outcomes == kAllPlus) plus.push_back(&r);

  auto lookup = [&plus](const JointSetting& target) -> const CountRecord& {
    for (const auto* r : plus)
      if (r->setting.matches(target)) return *r;
    std::ostringstream msg;
    msg << "expand_filter_counts: no all-plus record at alpha_s=" << target.signal.alpha_deg
        << " phi_s=" << target.signal.phi << " alpha_i=" << target.idler.alpha_deg
        << " phi_i=" << target.idler.phi;
    throw MissingData(msg.str());
  };

  FilterEstimate est;
  const auto tuples = all_outcome_tuples();
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const JointSetting setting = quad.at(r, c);
      std::array<double, 16> n{}, var{};
      double total = 0.0;
      for (std::size_t k = 0; k < 16; ++k) {
        const auto& rec = lookup(flip_to_plus(setting, tuples[k]));
        n[k] = dark_subtracted ? subtract_dark(rec) : static_cast<double>(rec.raw);
        var[k] = static_cast<double>(rec.raw);
        total += n[k];
      }
      est.totals[r][c] = total;
      if (total <= 0.0) {
        est.sigma[r][c] = 1.0;
        continue;
      }
      double e = 0.0, e_pol = 0.0, e_et = 0.0;
      for (std::size_t k = 0; k < 16; ++k) {
        const auto& o = tuples[k];
        e += sign(o[0]) * sign(o[1]) * sign(o[2]) * sign(o[3]) * n[k];
        e_pol += sign(o[0]) * sign(o[2]) * n[k];
        e_et += sign(o[1]) * sign(o[3]) * n[k];
      }
      e /= total;
      double v = 0.0;
      for (std::size_t k = 0; k < 16; ++k) {
        const auto& o = tuples[k];
        const double d = sign(o[0]) * sign(o[1]) * sign(o[2]) * sign(o[3]) - e;
        v += d * d * var[k];
      }
      est.correlators[r][c] = e;
      est.sigma[r][c] = std::sqrt(v) / total;
      est.pol_correlators[r][c] = e_pol / total;
      est.et_correlators[r][c] = e_et / total;
    }
  }
  return est;
}

// --- fringe fitting ------------------------------------------------------------

double FringeFit::model(double alpha_i_deg, double phi_i) const {
  return amplitude * (1.0 + visibility_pol * std::cos(2.0 * (alpha_i_deg - alpha_offset_deg) * kDeg)) *
         (1.0 + visibility_et * std::cos(phi_i - phase_offset));
}

namespace {

// Distinct values of one grid axis must cover a full period.
void check_axis(std::vector<double> values, double period, const char* name) {
  for (auto& v : values) v = wrap(v, period);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end(),
                           [period](double a, double b) { return std::abs(a - b) < 1e-9 * period; }),
               values.end());
  if (values.size() < 5)
    throw InvalidParameter(std::string("fit_fringes: degenerate grid, fewer than 5 distinct ") + name +
                           " values");
  // Largest circular gap must be smaller than half a period for the
  // harmonic projection to be well posed.
  double gap = values.front() + period - values.back();
  for (std::size_t k = 1; k < values.size(); ++k) gap = std::max(gap, values[k] - values[k - 1]);
  if (gap > 0.5 * period)
    throw InvalidParameter(std::string("fit_fringes: grid does not cover a period in ") + name);
}

struct Basis {
  double f[3];
  double g[3];
};

Basis basis(const FringePoint& p) {
  const double a = 2.0 * p.alpha_i_deg * kDeg;
  return {{1.0, std::cos(a), std::sin(a)}, {1.0, std::cos(p.phi_i), std::sin(p.phi_i)}};
}

}  // namespace

FringeFit fit_fringes(const std::vector<FringePoint>& points, const FringeFitOptions& options) {
  if (points.size() < 25) throw InvalidParameter("fit_fringes: need at least 5x5 grid points");
  {
    std::vector<double> a, p;
    for (const auto& pt : points) {
      a.push_back(pt.alpha_i_deg);
      p.push_back(pt.phi_i);
    }
    check_axis(std::move(a), 180.0, "alpha_i");
    check_axis(std::move(p), 2.0 * kPi, "phi_i");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  std::vector<Basis> bases;
  bases.reserve(points.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    bases.push_back(basis(points[static_cast<std::size_t>(i)]));
    y(i) = points[static_cast<std::size_t>(i)].counts;
  }

  // Linear projection onto the nine product harmonics.
  Eigen::MatrixXd x(n, 9);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) x(i, 3 * j + k) = bases[static_cast<std::size_t>(i)].f[j] * bases[static_cast<std::size_t>(i)].g[k];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 9) throw InvalidParameter("fit_fringes: degenerate grid, harmonics not resolvable");
  const Eigen::VectorXd coef = qr.solve(y);
  Eigen::Matrix3d b;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) b(j, k) = coef(3 * j + k);

  // Parameters: A, c1, s1, c2, s2 with model A (1 + c1 cos2a + s1 sin2a)(1 + c2 cos p + s2 sin p).
  Eigen::Matrix<double, 5, 1> theta;
  if (std::abs(b(0, 0)) < 1e-300) {
    theta << 0.0, 0.0, 0.0, 0.0, 0.0;
  } else {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d u = svd.matrixU().col(0);
    const Eigen::Vector3d v = svd.matrixV().col(0);
    if (std::abs(u(0)) > 1e-12 && std::abs(v(0)) > 1e-12) {
      theta << svd.singularValues()(0) * u(0) * v(0), u(1) / u(0), u(2) / u(0), v(1) / v(0), v(2) / v(0);
    } else {
      theta << b(0, 0), b(1, 0) / b(0, 0), b(2, 0) / b(0, 0), b(0, 1) / b(0, 0), b(0, 2) / b(0, 0);
    }
  }

  auto evaluate = [&](const Eigen::Matrix<double, 5, 1>& t, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& bs = bases[static_cast<std::size_t>(i)];
      const double fa = 1.0 + t(1) * bs.f[1] + t(2) * bs.f[2];
      const double gp = 1.0 + t(3) * bs.g[1] + t(4) * bs.g[2];
      r(i) = t(0) * fa * gp - y(i);
      if (jac) {
        (*jac)(i, 0) = fa * gp;
        (*jac)(i, 1) = t(0) * bs.f[1] * gp;
        (*jac)(i, 2) = t(0) * bs.f[2] * gp;
        (*jac)(i, 3) = t(0) * fa * bs.g[1];
        (*jac)(i, 4) = t(0) * fa * bs.g[2];
      }
    }
    return r.squaredNorm();
  };

  Eigen::VectorXd r(n), r_trial(n);
  Eigen::MatrixXd jac(n, 5);
  double ssr = evaluate(theta, r, &jac);
  const double scale = std::max(1.0, y.squaredNorm());
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations && !converged; ++iter) {
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> grad = jac.transpose() * r;
    if (ssr <= 1e-28 * scale || grad.norm() <= 1e-14 * std::sqrt(scale) * std::sqrt(jtj.trace())) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, 5, 5> damped = jtj;
      for (int k = 0; k < 5; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::Matrix<double, 5, 1> step = damped.ldlt().solve(-grad);
      const Eigen::Matrix<double, 5, 1> trial = theta + step;
      const double trial_ssr = evaluate(trial, r_trial, nullptr);
      if (std::isfinite(trial_ssr) && trial_ssr <= ssr) {
        const double rel_step = step.norm() / (theta.norm() + 1e-300);
        const double rel_gain = (ssr - trial_ssr) / std::max(ssr, 1e-300);
        theta = trial;
        ssr = evaluate(theta, r, &jac);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (rel_step < options.tolerance || rel_gain < 1e-15) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No descent direction left: stationary up to round-off.
          converged = grad.norm() <= 1e-6 * std::sqrt(scale) * std::sqrt(jtj.trace());
          if (!converged) throw NonConvergence("fit_fringes: damping exhausted away from a stationary point");
          break;
        }
      }
    }
  }
  if (!converged) throw NonConvergence("fit_fringes: no convergence after " + std::to_string(iter) + " iterations");

  FringeFit fit;
  fit.amplitude = theta(0);
  const double vp = std::hypot(theta(1), theta(2));
  const double ve = std::hypot(theta(3), theta(4));
  fit.visibility_pol = std::clamp(vp, 0.0, 1.0);
  fit.visibility_et = std::clamp(ve, 0.0, 1.0);
  fit.alpha_offset_deg = wrap(0.5 * std::atan2(theta(2), theta(1)) / kDeg, 180.0);
  fit.phase_offset = wrap(std::atan2(theta(4), theta(3)), 2.0 * kPi);
  fit.residual = ssr;
  fit.iterations = iter;
  return fit;
}

std::vector<FringePoint> fringe_points(const std::vector<CountRecord>& records, bool dark_subtracted) {
  std::vector<FringePoint> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({r.setting.idler.alpha_deg, r.setting.idler.phi,
                   dark_subtracted ? subtract_dark(r) : static_cast<double>(r.raw)});
  return out;
}

// --- CSV -------------------------------------------------------------------------

const char* const kCountCsvHeader =
    "alpha_s_deg,phi_s_rad,pol_mode_s,et_mode_s,alpha_i_deg,phi_i_rad,pol_mode_i,et_mode_i,outcomes,"
    "integration_time_s,raw,dark,expected_dark,corrected,signal_channel,idler_channel";

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidParameter("counts CSV line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line, const char* field) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidParameter("counts CSV line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  return v;
}

const char* pol_mode_name(PolMode m) { return m == PolMode::Linear ? "linear" : "circular"; }
const char* et_mode_name(EtMode m) { return m == EtMode::CentralSlot ? "central" : "timebin"; }

PolMode parse_pol_mode(const std::string& s, std::size_t line) {
  if (s == "linear") return PolMode::Linear;
  if (s == "circular") return PolMode::Circular;
  throw InvalidParameter("counts CSV line " + std::to_string(line) + ": bad pol_mode '" + s + "'");
}

EtMode parse_et_mode(const std::string& s, std::size_t line) {
  if (s == "central") return EtMode::CentralSlot;
  if (s == "timebin") return EtMode::TimeBin;
  throw InvalidParameter("counts CSV line " + std::to_string(line) + ": bad et_mode '" + s + "'");
}

}  // namespace

void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records) {
  out << kCountCsvHeader << '\n';
  for (const auto& r : records) {
    std::string outcomes;
    for (auto o : r.outcomes) outcomes += o == Outcome::Plus ? '+' : '-';
    out << fmt_double(r.setting.signal.alpha_deg) << ',' << fmt_double(r.setting.signal.phi) << ','
        << pol_mode_name(r.setting.signal.pol_mode) << ',' << et_mode_name(r.setting.signal.et_mode) << ','
        << fmt_double(r.setting.idler.alpha_deg) << ',' << fmt_double(r.setting.idler.phi) << ','
        << pol_mode_name(r.setting.idler.pol_mode) << ',' << et_mode_name(r.setting.idler.et_mode) << ','
        << outcomes << ',' << fmt_double(r.integration_time_s) << ',' << r.raw << ',' << r.dark << ','
        << fmt_double(r.expected_dark) << ',' << fmt_double(subtract_dark(r)) << ','
        << r.channels.signal.number() << ',' << r.channels.idler.number() << '\n';
  }
}

std::vector<CountRecord> read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCountCsvHeader)
    throw InvalidParameter("counts CSV: missing or unexpected header");
  std::vector<CountRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 16)
      throw InvalidParameter("counts CSV line " + std::to_string(line_no) + ": expected 16 fields, got " +
                             std::to_string(f.size()));
    CountRecord r;
    r.setting.signal = {parse_double(f[0], line_no, "alpha_s_deg"), parse_double(f[1], line_no, "phi_s_rad"),
                        parse_pol_mode(f[2], line_no), parse_et_mode(f[3], line_no)};
    r.setting.idler = {parse_double(f[4], line_no, "alpha_i_deg"), parse_double(f[5], line_no, "phi_i_rad"),
                       parse_pol_mode(f[6], line_no), parse_et_mode(f[7], line_no)};
    if (f[8].size() != 4)
      throw InvalidParameter("counts CSV line " + std::to_string(line_no) + ": bad outcomes '" + f[8] + "'");
    for (std::size_t k = 0; k < 4; ++k) {
      if (f[8][k] != '+' && f[8][k] != '-')
        throw InvalidParameter("counts CSV line " + std::to_string(line_no) + ": bad outcomes '" + f[8] + "'");
      r.outcomes[k] = f[8][k] == '+' ? Outcome::Plus : Outcome::Minus;
    }
    r.integration_time_s = parse_double(f[9], line_no, "integration_time_s");
    r.raw = parse_count(f[10], line_no, "raw");
    r.dark = parse_count(f[11], line_no, "dark");
    r.expected_dark = parse_double(f[12], line_no, "expected_dark");
    const int s = static_cast<int>(parse_count(f[14], line_no, "signal_channel"));
    const int i = static_cast<int>(parse_count(f[15], line_no, "idler_channel"));
    r.channels = pair_for(s, s + i);
    out.push_back(r);
  }
  return out;
}

}  // namespace hyperent
