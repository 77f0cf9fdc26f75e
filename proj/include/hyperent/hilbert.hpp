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

// Dense complex linear algebra for the pol x time-bin two-photon space, and
// constructors for ideal and noisy hyperentangled states.
//
// Basis ordering of the 16-dimensional space is fixed as
//
//     |pol_s> (x) |time_s> (x) |pol_i> (x) |time_i>
//
// with H = 0, V = 1, E = 0, L = 1 and the leftmost factor most significant,
// so index = 8*pol_s + 4*time_s + 2*pol_i + time_i.  The 4-dimensional
// single-DOF sub-models use |x_s> (x) |x_i>.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hyperent {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

enum class Pol : int { H = 0, V = 1 };
enum class TimeBin : int { E = 0, L = 1 };

inline constexpr std::size_t kHyperDim = 16;
inline constexpr std::size_t kPairDim = 4;

constexpr std::size_t hyper_index(Pol pol_s, TimeBin time_s, Pol pol_i, TimeBin time_i) {
  return 8 * static_cast<std::size_t>(pol_s) + 4 * static_cast<std::size_t>(time_s) +
         2 * static_cast<std::size_t>(pol_i) + static_cast<std::size_t>(time_i);
}

// Tolerances shared by the invariant checks.
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenFloor = -1e-9;

/// Unit-norm pure state.  Construction throws InvalidState when the
/// amplitudes are not normalized within kNormTolerance.
class StateVector {
 public:
  explicit StateVector(ComplexVector amplitudes);

  /// Rescales arbitrary nonzero amplitudes to unit norm.
  static StateVector normalized(ComplexVector amplitudes);

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex operator[](std::size_t k) const { return amplitudes_(static_cast<Eigen::Index>(k)); }

  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.  The constructor
/// validates all three invariants (see the tolerances above) and
/// symmetrizes away round-off below the Hermitian tolerance.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix matrix);

  static DensityOperator pure(const StateVector& psi);
  static DensityOperator maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

 private:
  ComplexMatrix matrix_;
};

/// Noise channel parameters.  All-zero noise with unit visibilities is the
/// identity channel.
struct NoiseModel {
  double phase_jitter_sigma = 0.0;  // rad, std-dev of phi_s + phi_i
  double pump_imbalance = 0.0;      // p_HH = 1/2 + eps
  double white_noise_weight = 0.0;  // w in [0, 1]
  double visibility_pol = 1.0;      // per-DOF visibility override
  double visibility_et = 1.0;

  /// Throws InvalidParameter for out-of-range values.
  void validate() const;
};

// --- standard kernels -----------------------------------------------------

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix dagger(const ComplexMatrix& a);
Complex trace(const ComplexMatrix& a);

/// True iff the smallest eigenvalue of the Hermitian part is >= -1e-9.
bool eigen_floor_check(const ComplexMatrix& m);
bool eigen_floor_check(const DensityOperator& rho);
double min_eigenvalue(const ComplexMatrix& hermitian);

/// Partial trace over a multipartite matrix.  `dims` lists subsystem
/// dimensions (most significant first); `keep` lists the subsystems that
/// survive, in increasing order.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Trace norm distance 1/2 ||a - b||_1 for Hermitian arguments.
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

// --- states -----------------------------------------------------------------

/// (|EE> + e^{i phase_sum}|LL>) (x) (|HH> + |VV>) / 2 in the fixed ordering.
StateVector make_hyper_state(double phase_sum);

/// (|HH> + |VV>) / sqrt(2) on pol_s (x) pol_i.
StateVector make_pol_bell();

/// Applies, in order: pump imbalance (amplitude reweighting of the HH and VV
/// branches), Gaussian phase jitter on the time-bin coherences, per-DOF
/// depolarization with the visibility overrides, and white noise.
/// Accepts the 16-dim hyper state or a 4-dim polarization state (for which
/// the time-bin parameters must be at their identity values).
DensityOperator apply_noise(const StateVector& state, const NoiseModel& model);

/// e^{-sigma^2 / 2}: mean of e^{i delta} over delta ~ N(0, sigma^2).
double gaussian_dephasing_factor(double sigma);

/// <psi| rho |psi>.
double fidelity(const DensityOperator& rho, const StateVector& target);

}  // namespace hyperent
