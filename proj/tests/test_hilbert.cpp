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

#include <cmath>
#include <numbers>
#include <random>

#include "hyperent/errors.hpp"
#include "hyperent/hilbert.hpp"

using namespace hyperent;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson quadrature of cos(d) against the N(0, sigma^2) density.
double quadrature_mean_cos(double sigma) {
  const int n = 20000;
  const double lo = -12.0 * sigma, hi = 12.0 * sigma, h = (hi - lo) / n;
  auto f = [sigma](double d) {
    return std::cos(d) * std::exp(-0.5 * d * d / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
  };
  double acc = f(lo) + f(hi);
  for (int k = 1; k < n; ++k) acc += f(lo + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

NoiseModel random_model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NoiseModel m;
  m.phase_jitter_sigma = 3.0 * u(rng);
  m.pump_imbalance = u(rng) - 0.5;
  m.white_noise_weight = u(rng);
  m.visibility_pol = u(rng);
  m.visibility_et = u(rng);
  return m;
}

}  // namespace

TEST_CASE("hyper state amplitudes and ordering") {
  const auto psi = make_hyper_state(0.0);
  REQUIRE(psi.dim() == 16);
  CHECK(psi.amplitudes().norm() == Approx(1.0).margin(1e-12));
  CHECK(psi[0] == Complex(0.5, 0.0));   // HEHE
  CHECK(psi[5] == Complex(0.5, 0.0));   // HLHL
  CHECK(psi[10] == Complex(0.5, 0.0));  // VEVE
  CHECK(psi[15] == Complex(0.5, 0.0));  // VLVL
  CHECK(hyper_index(Pol::V, TimeBin::L, Pol::V, TimeBin::L) == 15);
  for (std::size_t k : {1, 2, 3, 4, 6, 7, 8, 9, 11, 12, 13, 14}) CHECK(std::abs(psi[k]) == 0.0);

  const auto flipped = make_hyper_state(kPi);
  CHECK(flipped[5].real() == Approx(-0.5).margin(1e-15));
  CHECK(flipped[15].real() == Approx(-0.5).margin(1e-15));
  CHECK(flipped[0].real() == 0.5);
  CHECK(flipped.amplitudes().norm() == Approx(1.0).margin(1e-12));

  // |<psi_0|psi_{pi/2}>|^2 = |(2 + 2i)/4|^2 = 1/2
  CHECK(fidelity(DensityOperator::pure(make_hyper_state(kPi / 2)), make_hyper_state(0.0)) ==
        Approx(0.5).margin(1e-14));
}

TEST_CASE("polarization Bell state and the time-traced hyper state") {
  const auto bell = make_pol_bell();
  CHECK(bell[0].real() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(bell[3].real() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(bell[1]) == 0.0);
  CHECK(std::abs(bell[2]) == 0.0);

  const std::size_t dims[] = {2, 2, 2, 2};
  const std::size_t keep[] = {0, 2};
  const ComplexMatrix pol = partial_trace(make_hyper_state(0.0).projector(), dims, keep);
  CHECK(fidelity(DensityOperator(pol), bell) == Approx(1.0).margin(1e-14));
}

TEST_CASE("kernels") {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(tensor(i2, i2).isApprox(ComplexMatrix::Identity(4, 4)));
  ComplexMatrix a(2, 3);
  a << Complex(1, 2), 3, Complex(0, -1), 4, Complex(5, 5), 6;
  CHECK(dagger(dagger(a)) == a);
  CHECK(trace(make_hyper_state(0.3).projector()).real() == Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(trace(a), DimensionMismatch);

  ComplexMatrix neg = ComplexMatrix::Identity(2, 2);
  neg(1, 1) = -1e-8;
  CHECK_FALSE(eigen_floor_check(neg));
  neg(1, 1) = -1e-10;
  CHECK(eigen_floor_check(neg));
}

TEST_CASE("density operator invariants are enforced") {
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityOperator(bad), InvalidState);  // trace 2
  bad = ComplexMatrix::Identity(2, 2) * 0.5;
  bad(0, 1) = 0.2;
  CHECK_THROWS_AS(DensityOperator(bad), InvalidState);  // not Hermitian
  bad(1, 0) = 0.2;
  bad(0, 1) = 0.9;
  bad(1, 0) = 0.9;
  CHECK_THROWS_AS(DensityOperator(bad), InvalidState);  // negative eigenvalue
  CHECK_THROWS_AS(StateVector(ComplexVector::Ones(2)), InvalidState);
}

TEST_CASE("fidelity") {
  const auto psi = make_hyper_state(0.0);
  CHECK(fidelity(DensityOperator::pure(psi), psi) == Approx(1.0).margin(1e-14));
  CHECK(fidelity(DensityOperator::maximally_mixed(16), psi) == Approx(1.0 / 16.0).margin(1e-15));
  for (double w : {0.0, 0.1, 0.37, 0.8, 1.0}) {
    NoiseModel m;
    m.white_noise_weight = w;
    CHECK(fidelity(apply_noise(psi, m), psi) == Approx(1.0 - 15.0 * w / 16.0).margin(1e-14));
  }
  CHECK_THROWS_AS(fidelity(DensityOperator::maximally_mixed(4), psi), DimensionMismatch);
}

TEST_CASE("apply_noise identity and maximally mixed cases") {
  const auto psi = make_hyper_state(0.7);
  const auto rho = apply_noise(psi, NoiseModel{});
  CHECK((rho.matrix() - psi.projector()).cwiseAbs().maxCoeff() < 1e-14);

  NoiseModel full;
  full.white_noise_weight = 1.0;
  const auto mixed = apply_noise(psi, full);
  CHECK((mixed.matrix() - ComplexMatrix::Identity(16, 16) / 16.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("Gaussian phase jitter multiplies the time-bin coherence") {
  const double sigma = 2.0 * kPi / 40.0;
  const double oracle = quadrature_mean_cos(sigma);
  CHECK(gaussian_dephasing_factor(sigma) == Approx(oracle).margin(1e-12));
  CHECK(gaussian_dephasing_factor(sigma) == Approx(0.9877).margin(1e-4));

  NoiseModel m;
  m.phase_jitter_sigma = sigma;
  const auto rho = apply_noise(make_hyper_state(0.0), m);
  // EE <-> LL coherence within the HH branch: HEHE (0) vs HLHL (5).
  CHECK(rho.matrix()(0, 5).real() == Approx(0.25 * oracle).margin(1e-14));
  // Pol coherences within the same time pair are untouched.
  CHECK(rho.matrix()(0, 10).real() == Approx(0.25).margin(1e-14));
}

TEST_CASE("Gaussian dephasing factor against Monte Carlo") {
  const double sigma = 2.0 * kPi / 40.0;
  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> g(0.0, sigma);
  const int n = 1'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double c = std::cos(g(rng));
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - gaussian_dephasing_factor(sigma)) < 3.0 * se);
}

TEST_CASE("pump imbalance reweights the polarization branches") {
  NoiseModel m;
  m.pump_imbalance = 0.01;
  const auto rho = apply_noise(make_hyper_state(0.0), m);
  const std::size_t dims[] = {2, 2, 2, 2};
  const std::size_t keep[] = {0, 2};
  const ComplexMatrix pol = partial_trace(rho.matrix(), dims, keep);
  CHECK(pol(0, 0).real() == Approx(0.51).margin(1e-14));
  CHECK(pol(3, 3).real() == Approx(0.49).margin(1e-14));
  CHECK(pol(0, 3).real() == Approx(0.5 * std::sqrt(1.0 - 4.0 * 0.01 * 0.01)).margin(1e-14));
}

TEST_CASE("noise parameters out of range are rejected") {
  const auto psi = make_hyper_state(0.0);
  NoiseModel m;
  m.white_noise_weight = 1.5;
  CHECK_THROWS_AS(apply_noise(psi, m), InvalidParameter);
  m = {};
  m.phase_jitter_sigma = -0.1;
  CHECK_THROWS_AS(apply_noise(psi, m), InvalidParameter);
  m = {};
  m.pump_imbalance = 0.7;
  CHECK_THROWS_AS(apply_noise(psi, m), InvalidParameter);
  m = {};
  m.visibility_et = -0.01;
  CHECK_THROWS_AS(apply_noise(psi, m), InvalidParameter);
  m = {};
  m.phase_jitter_sigma = 0.2;
  CHECK_THROWS_AS(apply_noise(make_pol_bell(), m), InvalidParameter);
}

TEST_CASE("apply_noise output is a valid density operator for random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto rho = apply_noise(make_hyper_state(phase(rng)), random_model(rng));
    const auto& m = rho.matrix();
    REQUIRE((m - m.adjoint()).cwiseAbs().maxCoeff() < kHermitianTolerance);
    REQUIRE(std::abs(m.trace().real() - 1.0) < kTraceTolerance);
    REQUIRE(eigen_floor_check(rho));
  }
}

TEST_CASE("per-DOF visibility depolarizes only that DOF") {
  NoiseModel m;
  m.visibility_pol = 0.9;
  const auto rho = apply_noise(make_hyper_state(0.0), m);
  const std::size_t dims[] = {2, 2, 2, 2};
  const std::size_t time_keep[] = {1, 3};
  const std::size_t pol_keep[] = {0, 2};
  const ComplexMatrix time = partial_trace(rho.matrix(), dims, time_keep);
  const ComplexMatrix ideal_time = partial_trace(make_hyper_state(0.0).projector(), dims, time_keep);
  CHECK((time - ideal_time).cwiseAbs().maxCoeff() < 1e-14);
  const ComplexMatrix pol = partial_trace(rho.matrix(), dims, pol_keep);
  CHECK(fidelity(DensityOperator(pol), make_pol_bell()) == Approx(0.9 + 0.1 / 4.0).margin(1e-14));
}
