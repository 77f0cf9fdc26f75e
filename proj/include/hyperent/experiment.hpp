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

// Coincidence-count simulation, dark-count handling, the 1-outcome filter
// expansion and separable 2-D fringe fitting.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyperent/dwdm.hpp"
#include "hyperent/hilbert.hpp"
#include "hyperent/measurement.hpp"

namespace hyperent {

struct CountRecord {
  JointSetting setting;
  OutcomeTuple outcomes = kAllPlus;
  double integration_time_s = 0.0;
  std::uint64_t raw = 0;    // signal + dark
  std::uint64_t dark = 0;   // dark part of `raw` (simulation only)
  double expected_dark = 0.0;
  ChannelPair channels = pair_for(10);
};

/// max(0, raw - expected_dark).
double subtract_dark(const CountRecord& record);

struct PlannedMeasurement {
  JointSetting setting;
  OutcomeTuple outcomes = kAllPlus;
  double integration_time_s = 1.0;
};

struct RunPlan {
  std::vector<PlannedMeasurement> measurements;
  // Post-selected coincidences per second summed over all 16 outcomes.
  double coincidence_rate_cps = 0.0;
  // Dark coincidences per second in one detector pair's window.
  double dark_rate_cps = 0.0;
  std::uint64_t seed = 0;
  ChannelPair channels = pair_for(10);
  AnalyzerConfig analyzer;

  void validate() const;
};

/// Deterministic per-measurement random stream derived from (seed, index).
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

/// Poisson(rate p t) signal plus independent Poisson(dark_rate t) dark counts
/// for every planned measurement.  Measurement k draws only from
/// substream_seed(seed, k), so results do not depend on evaluation order.
std::vector<CountRecord> simulate_counts(const DensityOperator& rho, const RunPlan& plan);

/// Noiseless counterpart of simulate_counts: expected counts, no rounding.
std::vector<double> expected_counts(const DensityOperator& rho, const RunPlan& plan);

/// Setting reached by moving each "-" outcome of `outcomes` onto the
/// orthogonal analyzer setting (alpha + 90 deg, phi + pi), so that the
/// all-"+" outcome there is the requested outcome at `setting`.
JointSetting flip_to_plus(const JointSetting& setting, const OutcomeTuple& outcomes);

/// All-"+" measurements needed to expand the 16 settings of `quad` into full
/// 16-outcome estimates: 256 settings.
std::vector<PlannedMeasurement> filter_sweep(const SettingQuad& quad, double integration_time_s);

struct FilterEstimate {
  CorrelationTable correlators{};      // joint four-sign correlator
  CorrelationTable sigma{};            // propagated Poisson uncertainty
  CorrelationTable pol_correlators{};  // single-DOF marginals
  CorrelationTable et_correlators{};
  CorrelationTable totals{};           // summed counts per setting

  double beta(const SignPattern& rows = kDefaultBetaSigns, const SignPattern& cols = kDefaultBetaSigns) const;
  double beta_sigma() const;
  /// CHSH of one DOF with its correlators averaged over the other DOF.
  double marginal_chsh(Dof dof, const SignPattern& signs = kDefaultBetaSigns) const;
};

/// Estimates every outcome of the 16 quad settings from all-"+" records.
/// Each outcome count is read from the record at flip_to_plus(setting,
/// outcome); the constant-total-rate assumption lets counts from different
/// windows be normalized by their per-setting sum.  Throws MissingData
/// when a required setting has no record.
FilterEstimate expand_filter_counts(const std::vector<CountRecord>& records, const SettingQuad& quad,
                                    bool dark_subtracted = true);

struct FringePoint {
  double alpha_i_deg;
  double phi_i;
  double counts;
};

struct FringeFit {
  double amplitude = 0.0;
  double visibility_pol = 0.0;
  double visibility_et = 0.0;
  double alpha_offset_deg = 0.0;  // a0 in [0, 180)
  double phase_offset = 0.0;      // p0 in [0, 2 pi)
  double residual = 0.0;          // sum of squared residuals
  int iterations = 0;

  /// A [1 + V_pol cos 2(alpha - a0)] [1 + V_et cos(phi - p0)].
  double model(double alpha_i_deg, double phi_i) const;
};

struct FringeFitOptions {
  int max_iterations = 200;
  double tolerance = 1e-13;  // relative parameter step
};

/// Unweighted least-squares fit of the separable 2-D sinusoid.  Starts from
/// the projection onto the nine product harmonics {1, cos 2a, sin 2a} x
/// {1, cos p, sin p}, then refines with damped Gauss-Newton.
/// Throws InvalidParameter for a degenerate grid and NonConvergence when the
/// refinement does not settle.
FringeFit fit_fringes(const std::vector<FringePoint>& points, const FringeFitOptions& options = {});

/// Fringe points from records, dark-subtracted or raw.
std::vector<FringePoint> fringe_points(const std::vector<CountRecord>& records, bool dark_subtracted = true);

// CSV schema, one record per line after the header:
//   alpha_s_deg,phi_s_rad,pol_mode_s,et_mode_s,alpha_i_deg,phi_i_rad,
//   pol_mode_i,et_mode_i,outcomes,integration_time_s,raw,dark,
//   expected_dark,corrected,signal_channel,idler_channel
// pol_mode is linear|circular, et_mode is central|timebin, outcomes is four
// characters from {+,-} in the order pol_s, et_s, pol_i, et_i.
extern const char* const kCountCsvHeader;

void write_counts_csv(std::ostream& out, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_counts_csv(std::istream& in);

}  // namespace hyperent
