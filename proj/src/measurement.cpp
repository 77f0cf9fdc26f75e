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

#include "hyperent/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hyperent/errors.hpp"

namespace hyperent {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

double wrap(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  // fmod can return `period` itself after the correction above.
  return r >= period ? 0.0 : r;
}

// Periodic distance.
double cyclic_gap(double a, double b, double period) {
  const double d = wrap(a - b, period);
  return std::min(d, period - d);
}

Matrix2c sigma_z() {
  Matrix2c z;
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

Matrix2c complement(const Matrix2c& plus, Outcome outcome) {
  return outcome == Outcome::Plus ? plus : Matrix2c(Matrix2c::Identity() - plus);
}

Matrix2c circular_plus() {
  Matrix2c p;
  p << 0.5, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.5;
  return p;
}

Matrix2c idler_pol_effect(const LocalSetting& s, Outcome o, const AnalyzerConfig& config) {
  const Matrix2c e = pol_effect(s, o);
  if (config.pol_convention == PolConvention::Difference) return e;
  const Matrix2c z = sigma_z();
  return z * e * z;
}

Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Matrix4c party_effect(const Matrix2c& pol, const Matrix2c& et) { return kron2(pol, et); }

// Dichotomic observables P(+) - P(-) for each DOF of one party.
struct PartyObservables {
  Matrix2c pol;
  Matrix2c et;
};

PartyObservables observables(const LocalSetting& s, bool idler, const AnalyzerConfig& config) {
  const auto pol_plus = idler ? idler_pol_effect(s, Outcome::Plus, config) : pol_effect(s, Outcome::Plus);
  const auto et_plus = et_effect(s, Outcome::Plus, config).effect;
  return {2.0 * pol_plus - Matrix2c::Identity(), 2.0 * et_plus - Matrix2c::Identity()};
}

Matrix4c dof_observable(const PartyObservables& o, Dof dof) {
  return dof == Dof::Pol ? kron2(o.pol, Matrix2c::Identity()) : kron2(Matrix2c::Identity(), o.et);
}

// M(k, l) = sum_{i,j} rho[(i,k),(j,l)] a(j,i): contraction of rho with a
// signal-side operator, leaving a 4x4 idler-side matrix.
Matrix4c contract_signal(const ComplexMatrix& rho, const Matrix4c& a) {
  Matrix4c m = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Complex aji = a(j, i);
      if (aji == Complex{}) continue;
      m += aji * rho.block<4, 4>(4 * i, 4 * j);
    }
  return m;
}

Complex trace_product(const Matrix4c& m, const Matrix4c& b) {
  // Tr(m b) = sum_{k,l} m(k,l) b(l,k)
  return (m.array() * b.transpose().array()).sum();
}

void require_hyper(const DensityOperator& rho, const char* what) {
  if (rho.dim() != kHyperDim)
    throw DimensionMismatch(std::string(what) + ": expected a 16-dimensional density operator, got " +
                            std::to_string(rho.dim()));
}

}  // namespace

std::array<OutcomeTuple, 16> all_outcome_tuples() {
  std::array<OutcomeTuple, 16> out{};
  for (std::size_t idx = 0; idx < 16; ++idx)
    for (std::size_t k = 0; k < 4; ++k)
      out[idx][k] = (idx >> k) & 1U ? Outcome::Minus : Outcome::Plus;
  return out;
}

// --- settings ----------------------------------------------------------------

LocalSetting LocalSetting::normalized() const {
  LocalSetting s = *this;
  s.alpha_deg = wrap(alpha_deg, 180.0);
  s.phi = wrap(phi, 2.0 * kPi);
  return s;
}

JointSetting JointSetting::from_angles(double alpha_s_deg, double alpha_i_deg, double phi_s,
                                       double phi_i) {
  JointSetting s;
  s.signal.alpha_deg = alpha_s_deg;
  s.signal.phi = phi_s;
  s.idler.alpha_deg = alpha_i_deg;
  s.idler.phi = phi_i;
  return s.normalized();
}

JointSetting JointSetting::normalized() const { return {signal.normalized(), idler.normalized()}; }

bool JointSetting::matches(const JointSetting& other, double tol) const {
  auto same = [tol](const LocalSetting& a, const LocalSetting& b) {
    if (a.pol_mode != b.pol_mode || a.et_mode != b.et_mode) return false;
    if (a.pol_mode == PolMode::Linear && cyclic_gap(a.alpha_deg, b.alpha_deg, 180.0) > tol) return false;
    if (a.et_mode == EtMode::CentralSlot && cyclic_gap(a.phi, b.phi, 2.0 * kPi) > tol) return false;
    return true;
  };
  return same(signal, other.signal) && same(idler, other.idler);
}

SettingQuad SettingQuad::standard(double alpha_s_deg, double phi_s, double alpha_i_deg, double phi_i) {
  SettingQuad q;
  q.alpha_s_deg = alpha_s_deg;
  q.alpha_s_prime_deg = alpha_s_deg + 45.0;
  q.alpha_i_deg = alpha_i_deg;
  q.alpha_i_prime_deg = alpha_i_deg + 45.0;
  q.phi_s = phi_s;
  q.phi_s_prime = phi_s + kPi / 2.0;
  q.phi_i = phi_i;
  q.phi_i_prime = phi_i + kPi / 2.0;
  return q;
}

JointSetting SettingQuad::at(std::size_t row, std::size_t col) const {
  if (row >= 4 || col >= 4) throw InvalidParameter("SettingQuad::at: index out of range");
  const double as = (col / 2 == 0) ? alpha_s_deg : alpha_s_prime_deg;
  const double ai = (col % 2 == 0) ? alpha_i_deg : alpha_i_prime_deg;
  const double ps = (row / 2 == 0) ? phi_s : phi_s_prime;
  const double pi = (row % 2 == 0) ? phi_i : phi_i_prime;
  return JointSetting::from_angles(as, ai, ps, pi);
}

void AnalyzerConfig::validate() const {
  if (!(coherence_time_ps > 0.0) || !(mi_imbalance_ps > 0.0) || !(mi_match_tolerance_ps >= 0.0))
    throw FransonInvalid("analyzer times must be positive");
  if (mi_imbalance_ps < kMinImbalanceRatio * coherence_time_ps)
    throw FransonInvalid("interferometer imbalance " + std::to_string(mi_imbalance_ps) +
                         " ps is not much larger than the coherence time " +
                         std::to_string(coherence_time_ps) + " ps");
  if (std::abs(mi_mismatch_ps) > mi_match_tolerance_ps)
    throw FransonInvalid("interferometer mismatch " + std::to_string(mi_mismatch_ps) +
                         " ps exceeds tolerance " + std::to_string(mi_match_tolerance_ps) + " ps");
}

// --- effects -----------------------------------------------------------------

Matrix2c pol_effect(double alpha_deg, Outcome outcome) {
  const double c = std::cos(alpha_deg * kDeg);
  const double s = std::sin(alpha_deg * kDeg);
  Matrix2c plus;
  plus << c * c, c * s, c * s, s * s;
  return complement(plus, outcome);
}

Matrix2c pol_effect(const LocalSetting& setting, Outcome outcome) {
  if (setting.pol_mode == PolMode::Circular) return complement(circular_plus(), outcome);
  return pol_effect(setting.alpha_deg, outcome);
}

EtEffect et_effect(double phi, Outcome outcome, const AnalyzerConfig& config) {
  config.validate();
  Matrix2c plus;
  const Complex e = std::polar(0.5, phi);
  plus << 0.5, std::conj(e), e, 0.5;
  return {complement(plus, outcome), kCentralSlotAcceptance};
}

EtEffect et_effect(const LocalSetting& setting, Outcome outcome, const AnalyzerConfig& config) {
  if (setting.et_mode == EtMode::CentralSlot) return et_effect(setting.phi, outcome, config);
  config.validate();
  Matrix2c early;
  early << 1.0, 0.0, 0.0, 0.0;
  // Side peaks carry the other half of the coincidences.
  return {complement(early, outcome), 1.0 - kCentralSlotAcceptance};
}

ComplexMatrix joint_effect(const JointSetting& setting, const OutcomeTuple& outcomes,
                           const AnalyzerConfig& config) {
  const Matrix4c a = party_effect(pol_effect(setting.signal, outcomes[0]),
                                  et_effect(setting.signal, outcomes[1], config).effect);
  const Matrix4c b = party_effect(idler_pol_effect(setting.idler, outcomes[2], config),
                                  et_effect(setting.idler, outcomes[3], config).effect);
  return tensor(a, b);
}

Complex expectation_product(const ComplexMatrix& rho, const Matrix4c& a, const Matrix4c& b) {
  if (rho.rows() != 16 || rho.cols() != 16)
    throw DimensionMismatch("expectation_product: expected a 16x16 matrix");
  return trace_product(contract_signal(rho, a), b);
}

double coincidence_probability(const DensityOperator& rho, const JointSetting& setting,
                               const OutcomeTuple& outcomes, const AnalyzerConfig& config) {
  require_hyper(rho, "coincidence_probability");
  const Matrix4c a = party_effect(pol_effect(setting.signal, outcomes[0]),
                                  et_effect(setting.signal, outcomes[1], config).effect);
  const Matrix4c b = party_effect(idler_pol_effect(setting.idler, outcomes[2], config),
                                  et_effect(setting.idler, outcomes[3], config).effect);
  return expectation_product(rho.matrix(), a, b).real();
}

double correlator(const DensityOperator& rho, const JointSetting& setting, const AnalyzerConfig& config) {
  require_hyper(rho, "correlator");
  const auto s = observables(setting.signal, false, config);
  const auto i = observables(setting.idler, true, config);
  const double e = expectation_product(rho.matrix(), kron2(s.pol, s.et), kron2(i.pol, i.et)).real();
  return std::clamp(e, -1.0, 1.0);
}

double dof_correlator(const DensityOperator& rho, const JointSetting& setting, Dof dof,
                      const AnalyzerConfig& config) {
  require_hyper(rho, "dof_correlator");
  const auto s = observables(setting.signal, false, config);
  const auto i = observables(setting.idler, true, config);
  const double e =
      expectation_product(rho.matrix(), dof_observable(s, dof), dof_observable(i, dof)).real();
  return std::clamp(e, -1.0, 1.0);
}

// --- Bell functionals ----------------------------------------------------------

double chsh(const std::array<double, 4>& correlators, const SignPattern& signs, bool allow_nonstandard) {
  int minus = 0;
  for (int s : signs) {
    if (s != 1 && s != -1) throw InvalidParameter("chsh: signs must be +1 or -1");
    if (s < 0) ++minus;
  }
  if (!allow_nonstandard && minus != 1 && minus != 3)
    throw InvalidParameter("chsh: sign pattern must have exactly one odd sign");
  double sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) sum += signs[k] * correlators[k];
  return sum;
}

double generalized_beta(const CorrelationTable& table, const SignPattern& row_signs,
                        const SignPattern& col_signs) {
  double beta = 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) beta += row_signs[r] * col_signs[c] * table[r][c];
  return beta;
}

CorrelationTable correlation_table(const DensityOperator& rho, const SettingQuad& quad,
                                   const AnalyzerConfig& config) {
  CorrelationTable t{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) t[r][c] = correlator(rho, quad.at(r, c), config);
  return t;
}

double marginal_chsh(const DensityOperator& rho, const SettingQuad& quad, Dof dof,
                     const SignPattern& signs, const AnalyzerConfig& config) {
  // For Dof::EnergyTime the CHSH index runs over rows and the average over
  // columns (polarization settings); the other way round for Dof::Pol.
  std::array<double, 4> averaged{};
  for (std::size_t k = 0; k < 4; ++k) {
    double acc = 0.0;
    for (std::size_t other = 0; other < 4; ++other) {
      const auto setting = dof == Dof::EnergyTime ? quad.at(k, other) : quad.at(other, k);
      acc += dof_correlator(rho, setting, dof, config);
    }
    averaged[k] = acc / 4.0;
  }
  return chsh(averaged, signs);
}

BetaSurface beta_scan(const DensityOperator& rho, std::span<const double> alpha_grid_deg,
                      std::span<const double> phi_grid, const BetaScanOptions& options,
                      const AnalyzerConfig& config) {
  require_hyper(rho, "beta_scan");
  if (alpha_grid_deg.empty() || phi_grid.empty()) throw InvalidParameter("beta_scan: empty grid");
  config.validate();

  // Alice's four joint observables are fixed; contract them into rho once.
  // Index c_s = polarization choice, r_s = phase choice.
  std::array<std::array<Matrix4c, 2>, 2> reduced;  // [r_s][c_s]
  for (std::size_t rs = 0; rs < 2; ++rs)
    for (std::size_t cs = 0; cs < 2; ++cs) {
      LocalSetting alice;
      alice.alpha_deg = cs == 0 ? options.alpha_s_deg : options.alpha_s_prime_deg;
      alice.phi = rs == 0 ? options.phi_s : options.phi_s_prime;
      const auto o = observables(alice.normalized(), false, config);
      reduced[rs][cs] = contract_signal(rho.matrix(), kron2(o.pol, o.et));
    }

  BetaSurface surface;
  surface.alpha_grid_deg.assign(alpha_grid_deg.begin(), alpha_grid_deg.end());
  surface.phi_grid.assign(phi_grid.begin(), phi_grid.end());
  surface.values.resize(alpha_grid_deg.size() * phi_grid.size());
  surface.max_value = -std::numeric_limits<double>::infinity();

  for (std::size_t a = 0; a < alpha_grid_deg.size(); ++a) {
    for (std::size_t p = 0; p < phi_grid.size(); ++p) {
      std::array<std::array<Matrix4c, 2>, 2> bob;  // [r_i][c_i]
      for (std::size_t ri = 0; ri < 2; ++ri)
        for (std::size_t ci = 0; ci < 2; ++ci) {
          LocalSetting b;
          b.alpha_deg = alpha_grid_deg[a] + (ci == 0 ? 0.0 : 45.0);
          b.phi = phi_grid[p] + (ri == 0 ? 0.0 : kPi / 2.0);
          const auto o = observables(b.normalized(), true, config);
          bob[ri][ci] = kron2(o.pol, o.et);
        }
      double beta = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
          const double e = trace_product(reduced[r / 2][c / 2], bob[r % 2][c % 2]).real();
          beta += options.row_signs[r] * options.col_signs[c] * e;
        }
      surface.values[a * phi_grid.size() + p] = beta;
      surface.max_value = std::max(surface.max_value, beta);
    }
  }
  // Periodic images of the maximum tie up to rounding; report the first one on the grid.
  const double cut = surface.max_value - 1e-12 * std::max(1.0, std::abs(surface.max_value));
  for (std::size_t k = 0; k < surface.values.size(); ++k)
    if (surface.values[k] >= cut) {
      surface.argmax_alpha_deg = alpha_grid_deg[k / phi_grid.size()];
      surface.argmax_phi = phi_grid[k % phi_grid.size()];
      break;
    }
  return surface;
}

double violation_sigmas(double beta, double sigma) {
  if (!(sigma > 0.0)) throw InvalidParameter("violation_sigmas: sigma must be positive");
  return std::max(0.0, (std::abs(beta) - 4.0) / sigma);
}

}  // namespace hyperent
