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


// Maximum-likelihood state tomography over product analyzer settings, with
// Poisson bootstrap intervals for the fidelity to a target state.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hyperent/experiment.hpp"
#include "hyperent/hilbert.hpp"
#include "hyperent/measurement.hpp"

namespace hyperent {

struct TomographyEntry {
  ComplexMatrix effect;  // PSD, eigenvalues <= 1
  double count = 0.0;    // may be fractional after dark subtraction
  double trials = 0.0;   // expected coincidences for a unit-probability effect
  double background = 0.0;  // expected dark counts already subtracted from `count`
};

struct TomographyDataset {
  std::vector<TomographyEntry> entries;
  Eigen::Index dim = kHyperDim;

  /// Throws InvalidParameter on a malformed entry (negative or excess
  /// count, non-positive trials, effect not Hermitian in [0, I]).
  void validate() const;
  double total_count() const;
};

/// True when the effects span the full operator space of dimension dim^2.
bool informationally_complete(const TomographyDataset& data);

inline constexpr double kProbabilityFloor = 1e-12;

/// sum_k n_k log max(p_k, floor) - sum_k t_k p_k, with p_k = Tr(rho E_k).
double loglikelihood(const ComplexMatrix& rho, const TomographyDataset& data);

/// Derivative of loglikelihood(G^dag G / Tr(G^dag G)) with respect to G:
/// entry (i, j) holds dL/dRe G_ij + i dL/dIm G_ij.
ComplexMatrix loglikelihood_gradient(const ComplexMatrix& g, const TomographyDataset& data);

struct MleOptions {
  double tol = 1e-10;
  long max_iter = 100000;
  // Accept an effect set that does not span the operator space; the
  // estimate is then only determined on the measured subspace.
  bool allow_reduced_rank = false;
};

struct MleResult {
  DensityOperator rho_hat = DensityOperator::maximally_mixed(kHyperDim);
  double log_likelihood = 0.0;
  long iterations = 0;
  bool converged = false;
  double residual = 0.0;  // Frobenius norm of the fixed-point defect
  bool informationally_complete = true;
};

/// rho = G^dag G / Tr(G^dag G), ascended by diluted R rho R steps
/// G <- G (I + eps A) with adaptive eps; rejected steps shrink eps, so the
/// likelihood never decreases.  Stops when an accepted step gains less than
/// tol or the fixed-point residual drops below tol.  Non-convergence is
/// reported through `converged`, not thrown.
MleResult mle_reconstruct(const TomographyDataset& data, const MleOptions& options = {},
                          const ComplexMatrix* start = nullptr);

struct BootstrapOptions {
  int resamples = 200;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  MleOptions mle;
};

struct BootstrapResult {
  double low = 0.0;
  double high = 0.0;
  double point = 0.0;  // fidelity of the fit to the original data
  std::vector<double> fidelities;
  int failed = 0;      // resamples whose fit did not converge (excluded)
};

/// Parametric bootstrap: resample k redraws every raw count from
/// Poisson(t_k Tr(rho_hat E_k) + b_k) using substream_seed(seed, k),
/// subtracts the background b_k as the data were (floored at zero), refits
/// warm-started at rho_hat and returns the basic bootstrap interval
/// [2 F - q_hi, 2 F - q_lo], clamped to [0, 1].
BootstrapResult bootstrap_fidelity(const TomographyDataset& data, const MleResult& fit,
                                   const StateVector& target, const BootstrapOptions& options = {});

/// Pauli-product plan: per party, polarization in {0 deg, 45 deg, circular}
/// times energy-time in {time bin, phi = 0, phi = pi/2}; 81 settings, each
/// with all 16 outcomes.
std::vector<PlannedMeasurement> pauli_tomography_plan(double integration_time_s);

/// One entry per record.  Trials are coincidence_rate_cps times the
/// record's integration time; with dark subtraction the expected dark count
/// becomes the entry's background.
TomographyDataset dataset_from_records(const std::vector<CountRecord>& records, double coincidence_rate_cps,
                                       bool dark_subtracted = true, const AnalyzerConfig& analyzer = {});

/// Exact expected counts: count = scale Tr(rho E), trials = scale.
TomographyDataset dataset_from_probabilities(const DensityOperator& rho,
                                             const std::vector<PlannedMeasurement>& plan, double scale = 1.0,
                                             const AnalyzerConfig& analyzer = {});

/// Plain-text matrix: one row per line, entries "re,im" separated by
/// single spaces, shortest round-trip decimal form.
void write_matrix(std::ostream& out, const ComplexMatrix& m);
ComplexMatrix read_matrix(std::istream& in);

}  // namespace hyperent
