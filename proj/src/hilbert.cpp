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

#include "hyperent/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hyperent/errors.hpp"

namespace hyperent {

namespace {

std::size_t product(std::span<const std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

// Splits a flat index into per-subsystem digits (most significant first).
void decompose(std::size_t index, std::span<const std::size_t> dims, std::span<std::size_t> out) {
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
}

std::size_t compose(std::span<const std::size_t> digits, std::span<const std::size_t> dims) {
  std::size_t index = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) index = index * dims[k] + digits[k];
  return index;
}

// rho -> (Tr_S rho) (x) I_S / d_S, with S the subsystems flagged in `mixed`.
ComplexMatrix replace_with_mixed(const ComplexMatrix& rho, std::span<const std::size_t> dims,
                                 std::span<const bool> mixed) {
  const auto n = static_cast<std::size_t>(rho.rows());
  std::size_t mixed_dim = 1;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (mixed[k]) mixed_dim *= dims[k];

  std::vector<std::size_t> r(dims.size()), c(dims.size()), rr(dims.size()), cc(dims.size());
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t row = 0; row < n; ++row) {
    decompose(row, dims, r);
    for (std::size_t col = 0; col < n; ++col) {
      decompose(col, dims, c);
      bool diagonal_in_mixed = true;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (mixed[k] && r[k] != c[k]) diagonal_in_mixed = false;
      if (!diagonal_in_mixed) continue;
      // Sum rho over the mixed subsystems' diagonal.
      Complex acc{0.0, 0.0};
      for (std::size_t t = 0; t < mixed_dim; ++t) {
        std::size_t rem = t;
        for (std::size_t k = dims.size(); k-- > 0;) {
          if (mixed[k]) {
            rr[k] = cc[k] = rem % dims[k];
            rem /= dims[k];
          } else {
            rr[k] = r[k];
            cc[k] = c[k];
          }
        }
        acc += rho(static_cast<Eigen::Index>(compose(rr, dims)),
                   static_cast<Eigen::Index>(compose(cc, dims)));
      }
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
          acc / static_cast<double>(mixed_dim);
    }
  }
  return out;
}

void check_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw DimensionMismatch(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
}

}  // namespace

// --- StateVector -------------------------------------------------------------

StateVector::StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw InvalidState("state vector is empty");
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kNormTolerance)
    throw InvalidState("state vector norm " + std::to_string(norm) + " is not 1");
}

StateVector StateVector::normalized(ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw InvalidState("cannot normalize a zero vector");
  return StateVector(amplitudes / norm);
}

// --- DensityOperator ---------------------------------------------------------

DensityOperator::DensityOperator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  check_square(matrix_, "density operator");
  if (matrix_.rows() == 0) throw InvalidState("density operator is empty");
  const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance)
    throw InvalidState("density operator is not Hermitian (deviation " + std::to_string(asym) + ")");
  matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTolerance)
    throw InvalidState("density operator trace " + std::to_string(tr) + " is not 1");
  if (!eigen_floor_check(matrix_))
    throw InvalidState("density operator has eigenvalue below " + std::to_string(kEigenFloor));
}

DensityOperator DensityOperator::pure(const StateVector& psi) { return DensityOperator(psi.projector()); }

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityOperator(ComplexMatrix::Identity(n, n) / static_cast<double>(dim));
}

// --- NoiseModel --------------------------------------------------------------

void NoiseModel::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(phase_jitter_sigma >= 0.0) || !std::isfinite(phase_jitter_sigma))
    throw InvalidParameter("phase_jitter_sigma must be finite and >= 0");
  if (!(std::abs(pump_imbalance) <= 0.5))
    throw InvalidParameter("pump_imbalance must lie in [-0.5, 0.5]");
  if (!in_unit(white_noise_weight)) throw InvalidParameter("white_noise_weight must lie in [0, 1]");
  if (!in_unit(visibility_pol)) throw InvalidParameter("visibility_pol must lie in [0, 1]");
  if (!in_unit(visibility_et)) throw InvalidParameter("visibility_et must lie in [0, 1]");
}

// --- kernels -----------------------------------------------------------------

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

Complex trace(const ComplexMatrix& a) {
  check_square(a, "trace");
  return a.trace();
}

double min_eigenvalue(const ComplexMatrix& hermitian) {
  check_square(hermitian, "eigenvalues");
  const ComplexMatrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool eigen_floor_check(const ComplexMatrix& m) { return min_eigenvalue(m) >= kEigenFloor; }

bool eigen_floor_check(const DensityOperator& rho) { return eigen_floor_check(rho.matrix()); }

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  check_square(m, "partial_trace");
  const std::size_t n = product(dims);
  if (static_cast<std::size_t>(m.rows()) != n)
    throw DimensionMismatch("partial_trace: subsystem dimensions do not match matrix size");
  std::vector<bool> kept(dims.size(), false);
  std::vector<std::size_t> kept_dims;
  for (auto k : keep) {
    if (k >= dims.size()) throw DimensionMismatch("partial_trace: subsystem index out of range");
    kept[k] = true;
  }
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (kept[k]) kept_dims.push_back(dims[k]);
  const std::size_t out_dim = product(kept_dims);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(out_dim),
                                          static_cast<Eigen::Index>(out_dim));
  std::vector<std::size_t> r(dims.size()), c(dims.size()), rk, ck;
  for (std::size_t row = 0; row < n; ++row) {
    decompose(row, dims, r);
    for (std::size_t col = 0; col < n; ++col) {
      decompose(col, dims, c);
      bool traced_equal = true;
      rk.clear();
      ck.clear();
      for (std::size_t k = 0; k < dims.size(); ++k) {
        if (kept[k]) {
          rk.push_back(r[k]);
          ck.push_back(c[k]);
        } else if (r[k] != c[k]) {
          traced_equal = false;
          break;
        }
      }
      if (!traced_equal) continue;
      out(static_cast<Eigen::Index>(compose(rk, kept_dims)),
          static_cast<Eigen::Index>(compose(ck, kept_dims))) +=
          m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
  }
  return out;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("trace_distance: shape mismatch");
  const ComplexMatrix d = a - b;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (d + d.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// --- states ------------------------------------------------------------------

StateVector make_hyper_state(double phase_sum) {
  ComplexVector amps = ComplexVector::Zero(kHyperDim);
  const Complex late = std::polar(0.5, phase_sum);
  for (Pol p : {Pol::H, Pol::V}) {
    amps(static_cast<Eigen::Index>(hyper_index(p, TimeBin::E, p, TimeBin::E))) = 0.5;
    amps(static_cast<Eigen::Index>(hyper_index(p, TimeBin::L, p, TimeBin::L))) = late;
  }
  return StateVector(std::move(amps));
}

StateVector make_pol_bell() {
  ComplexVector amps = ComplexVector::Zero(kPairDim);
  amps(0) = amps(3) = std::numbers::sqrt2 / 2.0;
  return StateVector(std::move(amps));
}

double gaussian_dephasing_factor(double sigma) { return std::exp(-0.5 * sigma * sigma); }

DensityOperator apply_noise(const StateVector& state, const NoiseModel& model) {
  model.validate();
  const bool hyper = state.dim() == kHyperDim;
  if (!hyper && state.dim() != kPairDim)
    throw DimensionMismatch("apply_noise: expected a 16- or 4-dimensional state");
  if (!hyper && (model.phase_jitter_sigma != 0.0 || model.visibility_et != 1.0))
    throw InvalidParameter("apply_noise: time-bin noise on a polarization-only state");

  // Polarization labels of each basis index: (pol_s, pol_i).
  auto pol_pair = [hyper](std::size_t k) {
    return hyper ? std::pair{(k >> 3) & 1U, (k >> 1) & 1U} : std::pair{(k >> 1) & 1U, k & 1U};
  };
  auto time_pair = [](std::size_t k) { return std::pair{(k >> 2) & 1U, k & 1U}; };

  ComplexVector amps = state.amplitudes();
  if (model.pump_imbalance != 0.0) {
    const double up = std::sqrt(1.0 + 2.0 * model.pump_imbalance);
    const double down = std::sqrt(1.0 - 2.0 * model.pump_imbalance);
    for (std::size_t k = 0; k < state.dim(); ++k) {
      const auto [ps, pi] = pol_pair(k);
      if (ps == 0 && pi == 0) amps(static_cast<Eigen::Index>(k)) *= up;
      if (ps == 1 && pi == 1) amps(static_cast<Eigen::Index>(k)) *= down;
    }
    const double norm = amps.norm();
    if (!(norm > 0.0)) throw InvalidParameter("apply_noise: imbalance removes the whole state");
    amps /= norm;
  }
  ComplexMatrix rho = amps * amps.adjoint();

  if (hyper && model.phase_jitter_sigma > 0.0) {
    const double factor = gaussian_dephasing_factor(model.phase_jitter_sigma);
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
      for (Eigen::Index c = 0; c < rho.cols(); ++c)
        if (time_pair(static_cast<std::size_t>(r)) != time_pair(static_cast<std::size_t>(c)))
          rho(r, c) *= factor;
  }

  if (hyper) {
    static constexpr std::size_t dims[] = {2, 2, 2, 2};
    static constexpr bool pol_slots[] = {true, false, true, false};
    static constexpr bool time_slots[] = {false, true, false, true};
    if (model.visibility_pol < 1.0)
      rho = model.visibility_pol * rho +
            (1.0 - model.visibility_pol) * replace_with_mixed(rho, dims, pol_slots);
    if (model.visibility_et < 1.0)
      rho = model.visibility_et * rho +
            (1.0 - model.visibility_et) * replace_with_mixed(rho, dims, time_slots);
  } else if (model.visibility_pol < 1.0) {
    const auto n = rho.rows();
    rho = model.visibility_pol * rho +
          (1.0 - model.visibility_pol) * ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  }

  if (model.white_noise_weight > 0.0) {
    const auto n = rho.rows();
    rho = (1.0 - model.white_noise_weight) * rho +
          model.white_noise_weight * ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  }
  return DensityOperator(std::move(rho));
}

double fidelity(const DensityOperator& rho, const StateVector& target) {
  if (rho.dim() != target.dim())
    throw DimensionMismatch("fidelity: state of dimension " + std::to_string(target.dim()) +
                            " against operator of dimension " + std::to_string(rho.dim()));
  const auto& psi = target.amplitudes();
  const double f = (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace hyperent
