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

// Analyzer chains (half-wave plate + PBS for polarization, unbalanced
// Michelson interferometer in the Franson configuration for energy-time),
// correlators, CHSH and the generalized Bell operator beta = beta1 (x) beta2.
//
// Outcome signs: PBS transmit = +1, reflect = -1.  The interferometer's
// central-slot "+" output projects onto (|E> + e^{i phi}|L>)/sqrt(2).

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hyperent/hilbert.hpp"

namespace hyperent {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;

/// A dichotomic outcome, +1 or -1.
enum class Outcome : int { Plus = 1, Minus = -1 };

constexpr int sign(Outcome o) { return static_cast<int>(o); }

/// Outcomes of one joint detection: (pol_s, et_s, pol_i, et_i).
using OutcomeTuple = std::array<Outcome, 4>;

inline constexpr OutcomeTuple kAllPlus{Outcome::Plus, Outcome::Plus, Outcome::Plus, Outcome::Plus};

/// The 16 outcome tuples; bit k of the index set means slot k is Minus.
std::array<OutcomeTuple, 16> all_outcome_tuples();

enum class Dof { Pol, EnergyTime };

// Polarization analyzer mode.  Circular inserts a quarter-wave plate and
// projects onto (|H> + i|V>)/sqrt(2) for +1; the angle is then ignored.
enum class PolMode { Linear, Circular };
// Energy-time readout.  TimeBin reads the side peaks and projects onto |E>
// for +1 and |L> for -1; the phase is then ignored.
enum class EtMode { CentralSlot, TimeBin };

/// Analyzer setting for one party.
struct LocalSetting {
  double alpha_deg = 0.0;  // [0, 180)
  double phi = 0.0;        // [0, 2 pi)
  PolMode pol_mode = PolMode::Linear;
  EtMode et_mode = EtMode::CentralSlot;

  LocalSetting normalized() const;
  bool operator==(const LocalSetting&) const = default;
};

struct JointSetting {
  LocalSetting signal;
  LocalSetting idler;

  static JointSetting from_angles(double alpha_s_deg, double alpha_i_deg, double phi_s, double phi_i);
  JointSetting normalized() const;
  /// Equality after normalization, angles compared within `tol`.
  bool matches(const JointSetting& other, double tol = 1e-9) const;
  bool operator==(const JointSetting&) const = default;
};

/// Unprimed and primed settings per party and DOF.
struct SettingQuad {
  double alpha_s_deg = 0.0, alpha_s_prime_deg = 45.0;
  double alpha_i_deg = 22.5, alpha_i_prime_deg = 67.5;
  double phi_s = 0.0, phi_s_prime = 0.0, phi_i = 0.0, phi_i_prime = 0.0;

  /// alpha' = alpha + 45 deg, phi' = phi + pi/2.
  static SettingQuad standard(double alpha_s_deg, double phi_s, double alpha_i_deg, double phi_i);

  /// Row r indexes phase pairs {(phi_s,phi_i), (phi_s,phi_i'), (phi_s',phi_i),
  /// (phi_s',phi_i')}; column c indexes the analogous polarization pairs.
  JointSetting at(std::size_t row, std::size_t col) const;
};

using CorrelationTable = std::array<std::array<double, 4>, 4>;
using SignPattern = std::array<int, 4>;

inline constexpr SignPattern kDefaultBetaSigns{-1, 1, 1, 1};

enum class PolConvention { Sum, Difference };

struct AnalyzerConfig {
  double mi_imbalance_ps = 300.0;
  double mi_match_tolerance_ps = 0.03;
  double mi_mismatch_ps = 0.0;  // actual difference of the two imbalances
  double coherence_time_ps = 5.0;
  // Sum: E_pol ~ cos 2(alpha_s + alpha_i); the idler analyzer angle is
  // mirrored (alpha_i -> -alpha_i) before projection.
  PolConvention pol_convention = PolConvention::Sum;

  /// Minimum imbalance / coherence-time ratio accepted as "much larger".
  static constexpr double kMinImbalanceRatio = 10.0;

  /// Throws FransonInvalid when post-selection would not isolate the
  /// two-photon interference term.
  void validate() const;
};

/// Rank-1 projector onto cos(a)|H> + sin(a)|V> (+1) or its complement (-1).
Matrix2c pol_effect(double alpha_deg, Outcome outcome);
Matrix2c pol_effect(const LocalSetting& setting, Outcome outcome);

struct EtEffect {
  Matrix2c effect;    // within the post-selected {E, L} subspace
  double acceptance;  // fraction of coincidences kept by central-slot post-selection
};

/// Interferometer effect in the post-selected subspace; throws
/// FransonInvalid if `config` fails validation.
EtEffect et_effect(double phi, Outcome outcome, const AnalyzerConfig& config);
EtEffect et_effect(const LocalSetting& setting, Outcome outcome, const AnalyzerConfig& config);

/// Fraction of coincidences landing in the central time slot of a matched
/// pair of interferometers (short-short and long-long paths).
inline constexpr double kCentralSlotAcceptance = 0.5;

/// 16x16 effect for the joint detection.
ComplexMatrix joint_effect(const JointSetting& setting, const OutcomeTuple& outcomes,
                           const AnalyzerConfig& config);

/// Tr(rho (a (x) b)) for a 16x16 rho and 4x4 single-party operators.
Complex expectation_product(const ComplexMatrix& rho, const Matrix4c& a, const Matrix4c& b);

double coincidence_probability(const DensityOperator& rho, const JointSetting& setting,
                               const OutcomeTuple& outcomes, const AnalyzerConfig& config = {});

/// Expectation of the product of all four outcome signs.
double correlator(const DensityOperator& rho, const JointSetting& setting,
                  const AnalyzerConfig& config = {});

/// Correlator of a single DOF, marginalizing over the other DOF's outcomes.
double dof_correlator(const DensityOperator& rho, const JointSetting& setting, Dof dof,
                      const AnalyzerConfig& config = {});

/// Signed CHSH sum.  Unless `allow_nonstandard`, the sign pattern must have
/// exactly one sign differing from the other three.
double chsh(const std::array<double, 4>& correlators, const SignPattern& signs,
            bool allow_nonstandard = false);

double generalized_beta(const CorrelationTable& table, const SignPattern& row_signs = kDefaultBetaSigns,
                        const SignPattern& col_signs = kDefaultBetaSigns);

CorrelationTable correlation_table(const DensityOperator& rho, const SettingQuad& quad,
                                   const AnalyzerConfig& config = {});

/// CHSH of one DOF with its correlators averaged over all settings of the
/// other DOF in the quad.
double marginal_chsh(const DensityOperator& rho, const SettingQuad& quad, Dof dof,
                     const SignPattern& signs = kDefaultBetaSigns, const AnalyzerConfig& config = {});

struct BetaScanOptions {
  double alpha_s_deg = 0.0;
  double alpha_s_prime_deg = 45.0;
  double phi_s = 0.0;
  double phi_s_prime = 1.5707963267948966;
  SignPattern row_signs = kDefaultBetaSigns;
  SignPattern col_signs = kDefaultBetaSigns;
};

struct BetaSurface {
  std::vector<double> alpha_grid_deg;
  std::vector<double> phi_grid;
  std::vector<double> values;  // row-major: alpha index major, phi index minor
  double max_value = 0.0;
  double argmax_alpha_deg = 0.0;
  double argmax_phi = 0.0;

  double at(std::size_t a, std::size_t p) const { return values[a * phi_grid.size() + p]; }
};

/// <beta> over Bob's (alpha_i, phi_i) grid with alpha_i' = alpha_i + 45 deg
/// and phi_i' = phi_i + pi/2, using one fixed sign weighting everywhere.
/// Ties in the argmax resolve to the first grid point in row-major order.
BetaSurface beta_scan(const DensityOperator& rho, std::span<const double> alpha_grid_deg,
                      std::span<const double> phi_grid, const BetaScanOptions& options = {},
                      const AnalyzerConfig& config = {});

/// (|beta| - 4) / sigma, floored at zero.
double violation_sigmas(double beta, double sigma);

}  // namespace hyperent
