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

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "hyperent/errors.hpp"
#include "hyperent/measurement.hpp"

using namespace hyperent;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index rank) {
  std::normal_distribution<double> g;
  ComplexMatrix a(dim, rank);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

JointSetting random_setting(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return JointSetting::from_angles(180.0 * u(rng), 180.0 * u(rng), 2 * kPi * u(rng), 2 * kPi * u(rng));
}

// Brute-force oracle: enumerate the 16 amplitudes of the rank-1 joint effect
// |w> = |pol_s>|et_s>|pol_i>|et_i> and evaluate <w|rho|w>.
double oracle_probability(const ComplexMatrix& rho, const JointSetting& s, const OutcomeTuple& o) {
  auto pol_vec = [](double deg, Outcome out, bool mirror) {
    const double a = (mirror ? -deg : deg) * kPi / 180.0;
    return out == Outcome::Plus ? std::array<Complex, 2>{std::cos(a), std::sin(a)}
                                : std::array<Complex, 2>{-std::sin(a), std::cos(a)};
  };
  auto et_vec = [](double phi, Outcome out) {
    const double r = 1.0 / std::sqrt(2.0);
    return out == Outcome::Plus ? std::array<Complex, 2>{r, std::polar(r, phi)}
                                : std::array<Complex, 2>{r, -std::polar(r, phi)};
  };
  const auto ps = pol_vec(s.signal.alpha_deg, o[0], false);
  const auto ts = et_vec(s.signal.phi, o[1]);
  const auto pi = pol_vec(s.idler.alpha_deg, o[2], true);
  const auto ti = et_vec(s.idler.phi, o[3]);
  std::array<Complex, 16> w{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) w[8 * a + 4 * b + 2 * c + d] = ps[a] * ts[b] * pi[c] * ti[d];
  Complex acc{};
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) acc += std::conj(w[i]) * rho(i, j) * w[j];
  return acc.real();
}

// Separable across the signal/idler cut: mixture of products of arbitrary
// single-photon (pol x time) states.
DensityOperator random_separable(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> terms(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComplexMatrix rho = ComplexMatrix::Zero(16, 16);
  double total = 0.0;
  const int n = terms(rng);
  for (int k = 0; k < n; ++k) {
    const double p = u(rng) + 1e-3;
    rho += p * tensor(random_density(rng, 4, 1 + k % 4), random_density(rng, 4, 1 + (k + 1) % 4));
    total += p;
  }
  return DensityOperator(rho / total);
}

}  // namespace

TEST_CASE("polarization effects") {
  const Matrix2c h = pol_effect(0.0, Outcome::Plus);
  CHECK(std::abs(h(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(h(1, 1)) < 1e-15);
  const Matrix2c d = pol_effect(45.0, Outcome::Plus);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(d(i, j) - 0.5) < 1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-360.0, 360.0);
  for (int k = 0; k < 50; ++k) {
    const double a = u(rng);
    CHECK((pol_effect(a, Outcome::Plus) + pol_effect(a, Outcome::Minus)).isApprox(Matrix2c::Identity()));
  }
}

TEST_CASE("interferometer effects") {
  const AnalyzerConfig config;
  const auto zero = et_effect(0.0, Outcome::Plus, config);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(zero.effect(i, j) - 0.5) < 1e-15);
  CHECK(zero.acceptance == 0.5);
  const auto pi = et_effect(kPi, Outcome::Plus, config).effect;
  CHECK(std::abs(pi(0, 1) + 0.5) < 1e-15);
  CHECK(std::abs(pi(1, 0) + 0.5) < 1e-15);
  const Matrix2c sum =
      et_effect(1.234, Outcome::Plus, config).effect + et_effect(1.234, Outcome::Minus, config).effect;
  CHECK(sum.isApprox(Matrix2c::Identity()));
}

TEST_CASE("Franson validity is checked") {
  AnalyzerConfig bad;
  bad.mi_imbalance_ps = 20.0;  // only 4x the coherence time
  CHECK_THROWS_AS(et_effect(0.0, Outcome::Plus, bad), FransonInvalid);
  AnalyzerConfig mismatched;
  mismatched.mi_mismatch_ps = 0.05;
  CHECK_THROWS_AS(et_effect(0.0, Outcome::Plus, mismatched), FransonInvalid);
  AnalyzerConfig ok;
  ok.mi_mismatch_ps = 0.02;
  CHECK_NOTHROW(et_effect(0.0, Outcome::Plus, ok));
}

TEST_CASE("coincidence probability matches the amplitude enumeration oracle") {
  const auto ideal = DensityOperator::pure(make_hyper_state(0.0));
  const auto zero = JointSetting::from_angles(0, 0, 0, 0);
  CHECK(coincidence_probability(ideal, zero, kAllPlus) == Approx(0.25).margin(1e-14));
  CHECK(oracle_probability(ideal.matrix(), zero, kAllPlus) == Approx(0.25).margin(1e-14));

  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const DensityOperator rho(random_density(rng, 16, 1 + k % 16));
    const auto s = random_setting(rng);
    for (const auto& o : all_outcome_tuples())
      REQUIRE(coincidence_probability(rho, s, o) == Approx(oracle_probability(rho.matrix(), s, o)).margin(1e-12));
  }

  const auto mixed = DensityOperator::maximally_mixed(16);
  for (const auto& o : all_outcome_tuples())
    CHECK(coincidence_probability(mixed, random_setting(rng), o) == Approx(1.0 / 16.0).margin(1e-15));
  CHECK_THROWS_AS(coincidence_probability(DensityOperator::maximally_mixed(4), zero, kAllPlus),
                  DimensionMismatch);
}

TEST_CASE("outcome completeness and no-signaling over random states") {
  std::mt19937_64 rng(12);
  const AnalyzerConfig config;
  for (int k = 0; k < 1000; ++k) {
    const DensityOperator rho(random_density(rng, 16, 1 + k % 16));
    const auto s = random_setting(rng);
    double total = 0.0;
    for (const auto& o : all_outcome_tuples()) total += coincidence_probability(rho, s, o, config);
    REQUIRE(std::abs(total - 1.0) < 1e-10);

    // Alice's marginal for each of her four outcome pairs under two Bob settings.
    auto s2 = s;
    s2.idler = random_setting(rng).idler;
    for (int a = 0; a < 4; ++a) {
      double m1 = 0.0, m2 = 0.0;
      for (const auto& o : all_outcome_tuples()) {
        if (o[0] != (a & 1 ? Outcome::Minus : Outcome::Plus)) continue;
        if (o[1] != (a & 2 ? Outcome::Minus : Outcome::Plus)) continue;
        m1 += coincidence_probability(rho, s, o, config);
        m2 += coincidence_probability(rho, s2, o, config);
      }
      REQUIRE(std::abs(m1 - m2) < 1e-10);
    }
  }
}

TEST_CASE("ideal-state correlators") {
  const auto ideal = DensityOperator::pure(make_hyper_state(0.0));
  const auto pol = JointSetting::from_angles(0.0, 22.5, 0.3, 1.1);
  CHECK(std::abs(dof_correlator(ideal, pol, Dof::Pol)) == Approx(std::cos(kPi / 4)).margin(1e-14));
  const auto et = JointSetting::from_angles(10.0, 70.0, kPi / 8, kPi / 8);
  CHECK(dof_correlator(ideal, et, Dof::EnergyTime) == Approx(std::cos(kPi / 4)).margin(1e-14));

  // Sum convention: E_pol = cos 2(alpha_s + alpha_i); difference: cos 2(alpha_s - alpha_i).
  const auto s = JointSetting::from_angles(10.0, 25.0, 0.0, 0.0);
  CHECK(dof_correlator(ideal, s, Dof::Pol) == Approx(std::cos(2 * 35.0 * kPi / 180)).margin(1e-14));
  AnalyzerConfig diff;
  diff.pol_convention = PolConvention::Difference;
  CHECK(dof_correlator(ideal, s, Dof::Pol, diff) == Approx(std::cos(2 * 15.0 * kPi / 180)).margin(1e-14));

  // Joint correlator is the product for the product-form ideal state.
  const auto j = JointSetting::from_angles(0.0, 22.5, 0.0, kPi / 4);
  CHECK(correlator(ideal, j) == Approx(0.5).margin(1e-14));

  const auto mixed = DensityOperator::maximally_mixed(16);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) CHECK(std::abs(correlator(mixed, random_setting(rng))) < 1e-15);
}

TEST_CASE("correlator equals the signed sum of outcome probabilities") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 100; ++k) {
    const DensityOperator rho(random_density(rng, 16, 3));
    const auto s = random_setting(rng);
    double e = 0.0;
    for (const auto& o : all_outcome_tuples())
      e += sign(o[0]) * sign(o[1]) * sign(o[2]) * sign(o[3]) * oracle_probability(rho.matrix(), s, o);
    REQUIRE(correlator(rho, s) == Approx(e).margin(1e-12));
  }
}

TEST_CASE("chsh") {
  const double r = std::sqrt(0.5);
  CHECK(chsh({r, r, r, -r}, {1, 1, 1, -1}) == Approx(2.0 * std::sqrt(2.0)).margin(1e-12));
  CHECK(chsh({0, 0, 0, 0}, {1, 1, 1, -1}) == 0.0);
  CHECK_THROWS_AS(chsh({0, 0, 0, 0}, {1, 1, -1, -1}), InvalidParameter);
  CHECK(chsh({1, 1, 1, 1}, {1, 1, -1, -1}, true) == 0.0);
}

TEST_CASE("generalized beta") {
  const CorrelationTable table_one{{{0.51, -0.33, -0.46, -0.41},
                                    {-0.57, 0.34, 0.50, 0.54},
                                    {-0.36, 0.30, 0.62, 0.52},
                                    {-0.69, 0.58, 0.55, 0.46}}};
  CHECK(generalized_beta(table_one) == Approx(7.74).margin(1e-9));

  const auto ideal = DensityOperator::pure(make_hyper_state(0.0));
  const auto quad = SettingQuad::standard(0.0, 0.0, 22.5, kPi / 4);
  const auto table = correlation_table(ideal, quad);
  for (const auto& row : table)
    for (double e : row) CHECK(std::abs(e) == Approx(0.5).margin(1e-14));
  CHECK(generalized_beta(table) == Approx(8.0).margin(1e-12));
  CHECK(generalized_beta(correlation_table(DensityOperator::maximally_mixed(16), quad)) ==
        Approx(0.0).margin(1e-14));
}

TEST_CASE("generalized beta factorizes on product-form tables") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::array<double, 4> pol{}, et{};
    for (auto& x : pol) x = u(rng);
    for (auto& x : et) x = u(rng);
    CorrelationTable t{};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) t[r][c] = pol[c] * et[r];
    SignPattern rs{}, cs{};
    for (auto& s : rs) s = u(rng) < 0 ? -1 : 1;
    for (auto& s : cs) s = u(rng) < 0 ? -1 : 1;
    double lhs_pol = 0.0, lhs_et = 0.0;
    for (std::size_t c = 0; c < 4; ++c) lhs_pol += cs[c] * pol[c];
    for (std::size_t r = 0; r < 4; ++r) lhs_et += rs[r] * et[r];
    REQUIRE(generalized_beta(t, rs, cs) == Approx(lhs_pol * lhs_et).margin(1e-12));
  }
}

TEST_CASE("separable states obey the local bounds") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const auto rho = random_separable(rng);
    const auto quad = SettingQuad::standard(180 * u(rng), 2 * kPi * u(rng), 180 * u(rng), 2 * kPi * u(rng));
    REQUIRE(std::abs(generalized_beta(correlation_table(rho, quad))) <= 4.0 + 1e-9);
    REQUIRE(std::abs(marginal_chsh(rho, quad, Dof::Pol)) <= 2.0 + 1e-9);
    REQUIRE(std::abs(marginal_chsh(rho, quad, Dof::EnergyTime)) <= 2.0 + 1e-9);
  }
}

TEST_CASE("beta scan of the ideal state") {
  const auto ideal = DensityOperator::pure(make_hyper_state(0.0));
  std::vector<double> alpha, phi;
  for (int k = 0; k < 96; ++k) alpha.push_back(180.0 * k / 96);
  for (int k = 0; k < 96; ++k) phi.push_back(2 * kPi * k / 96);
  const auto s = beta_scan(ideal, alpha, phi);
  CHECK(s.max_value == Approx(8.0).margin(1e-9));
  CHECK(s.argmax_alpha_deg == Approx(22.5).margin(1e-12));
  CHECK(s.argmax_phi == Approx(kPi / 4).margin(1e-12));

  // Surface agrees with the explicit table evaluation.
  const auto quad = SettingQuad::standard(0.0, 0.0, alpha[7], phi[30]);
  CHECK(s.at(7, 30) == Approx(generalized_beta(correlation_table(ideal, quad))).margin(1e-12));

  const auto flat = beta_scan(DensityOperator::maximally_mixed(16), alpha, phi);
  for (double v : flat.values) CHECK(std::abs(v) < 1e-14);
  CHECK_THROWS_AS(beta_scan(ideal, std::span<const double>{}, phi), InvalidParameter);
}

TEST_CASE("beta scan argmax is invariant under a common correlator scaling") {
  // White noise scales every correlator by (1 - w).
  std::vector<double> alpha, phi;
  for (int k = 0; k < 40; ++k) alpha.push_back(4.5 * k);
  for (int k = 0; k < 40; ++k) phi.push_back(2 * kPi * k / 40);
  NoiseModel m;
  m.phase_jitter_sigma = 0.3;
  m.visibility_pol = 0.9;
  const auto base = apply_noise(make_hyper_state(0.4), m);
  const auto a = beta_scan(base, alpha, phi);
  for (double w : {0.1, 0.5, 0.9}) {
    m.white_noise_weight = w;
    const auto b = beta_scan(apply_noise(make_hyper_state(0.4), m), alpha, phi);
    CHECK(b.argmax_alpha_deg == a.argmax_alpha_deg);
    CHECK(b.argmax_phi == a.argmax_phi);
    CHECK(b.max_value == Approx((1 - w) * a.max_value).margin(1e-12));
  }
}

TEST_CASE("visibility scaling of beta") {
  NoiseModel m;
  m.visibility_pol = 0.98;
  m.visibility_et = 0.98;
  const auto rho = apply_noise(make_hyper_state(0.0), m);
  const auto quad = SettingQuad::standard(0.0, 0.0, 22.5, kPi / 4);
  CHECK(generalized_beta(correlation_table(rho, quad)) == Approx(8 * 0.98 * 0.98).margin(1e-9));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    m.visibility_pol = u(rng);
    m.visibility_et = u(rng);
    const auto r = apply_noise(make_hyper_state(0.0), m);
    REQUIRE(generalized_beta(correlation_table(r, quad)) ==
            Approx(8 * m.visibility_pol * m.visibility_et).margin(1e-9));
  }
}

TEST_CASE("violation sigmas") {
  CHECK(violation_sigmas(7.73, 0.12) == Approx(31.083333).epsilon(1e-6));
  CHECK(violation_sigmas(7.25, 0.12) == Approx(27.083333).epsilon(1e-6));
  CHECK(violation_sigmas(4.0, 0.1) == 0.0);
  CHECK(violation_sigmas(3.0, 0.1) == 0.0);
  CHECK(violation_sigmas(-7.73, 0.12) == Approx(31.083333).epsilon(1e-6));
  CHECK_THROWS_AS(violation_sigmas(7.0, 0.0), InvalidParameter);
}

TEST_CASE("marginal CHSH of the ideal state reaches Tsirelson's bound") {
  const auto ideal = DensityOperator::pure(make_hyper_state(0.0));
  const auto quad = SettingQuad::standard(0.0, 0.0, 22.5, kPi / 4);
  CHECK(std::abs(marginal_chsh(ideal, quad, Dof::Pol)) == Approx(2 * std::sqrt(2.0)).margin(1e-12));
  CHECK(std::abs(marginal_chsh(ideal, quad, Dof::EnergyTime)) == Approx(2 * std::sqrt(2.0)).margin(1e-12));
}
