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

#include "hyperent/dwdm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hyperent/errors.hpp"

namespace hyperent {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// sinc^2(x) = 1/2 at x = 1.39155737...
constexpr double kSinc2HalfPoint = 1.3915573782515103;

double simpson(auto&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double band_integral(const SpectralEnvelope& env, double lo_nm, double hi_nm) {
  if (env.shape == EnvelopeShape::Gaussian) {
    const double s = env.fwhm_nm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double k = 1.0 / (s * std::numbers::sqrt2);
    return s * std::sqrt(std::numbers::pi / 2.0) *
           (std::erf((hi_nm - env.center_nm) * k) - std::erf((lo_nm - env.center_nm) * k));
  }
  return simpson([&env](double nm) { return env.value(nm); }, lo_nm, hi_nm, 2000);
}

// Wavelength interval of a band of width `width_thz` centred at `center_thz`.
std::pair<double, double> band_nm(double center_thz, double width_thz) {
  return {frequency_to_wavelength_nm(center_thz + width_thz / 2.0),
          frequency_to_wavelength_nm(center_thz - width_thz / 2.0)};
}

}  // namespace

ItuChannel::ItuChannel(int number) : number_(number) {
  if (number < kMinNumber || number > kMaxNumber)
    throw InvalidParameter("ITU channel " + std::to_string(number) + " is outside the supported grid [" +
                           std::to_string(kMinNumber) + ", " + std::to_string(kMaxNumber) + "]");
}

double frequency_to_wavelength_nm(double thz) { return kSpeedOfLightNmTHz / thz; }
double wavelength_to_frequency_thz(double nm) { return kSpeedOfLightNmTHz / nm; }

double ChannelPair::pump_wavelength_nm() const {
  return 1.0 / (1.0 / signal.wavelength_nm() + 1.0 / idler.wavelength_nm());
}

std::string ChannelPair::label() const {
  return "ITU" + std::to_string(signal.number()) + "-" + std::to_string(idler.number());
}

ChannelPair pair_for(int n, int pair_sum) {
  const ItuChannel a(n);
  const ItuChannel b(pair_sum - n);
  return a.number() <= b.number() ? ChannelPair{a, b, pair_sum} : ChannelPair{b, a, pair_sum};
}

std::vector<ChannelPair> default_channel_pairs() {
  std::vector<ChannelPair> out;
  for (int n = 10; n <= 14; ++n) out.push_back(pair_for(n));
  return out;
}

double SpectralEnvelope::value(double nm) const {
  const double d = nm - center_nm;
  if (shape == EnvelopeShape::Gaussian) return std::exp(-4.0 * std::numbers::ln2 * (d / fwhm_nm) * (d / fwhm_nm));
  const double s = sinc(2.0 * kSinc2HalfPoint * d / fwhm_nm);
  return s * s;
}

double spectrum_weight(const ChannelPair& pair, const SpectralEnvelope& envelope) {
  if (!(envelope.fwhm_nm > 0.0)) throw InvalidParameter("spectral envelope width must be positive");
  const double width = pair.signal.width_thz();
  const auto [lo, hi] = band_nm(pair.signal.frequency_thz(), width);
  return band_integral(envelope, lo, hi) / (hi - lo);
}

void DetectorSpec::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidParameter("detector efficiency must lie in (0, 1]");
  if (!(timing_resolution_ps > 0.0)) throw InvalidParameter("detector timing resolution must be positive");
  if (!(saturation_cps > 0.0)) throw InvalidParameter("detector saturation must be positive");
}

double LinkBudget::transmission_linear() const { return std::pow(10.0, transmission_db / 10.0); }

void LinkBudget::validate() const {
  if (!(transmission_db <= 0.0)) throw InvalidParameter("transmission must be <= 0 dB");
  auto unit = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!unit(singles_factor) || !unit(coincidence_factor) || !unit(multipair_fraction))
    throw InvalidParameter("budget factors must lie in (0, 1]");
  if (!(coherence_time_ps > 0.0)) throw InvalidParameter("coherence time must be positive");
  if (channel_count < 1) throw InvalidParameter("channel count must be >= 1");
}

std::string_view to_string(RateConstraint c) {
  switch (c) {
    case RateConstraint::CoherenceTime: return "coherence_time";
    case RateConstraint::TimingResolution: return "timing_resolution";
    case RateConstraint::Saturation: return "saturation";
  }
  return "unknown";
}

PairRateLimit max_pair_rate(const LinkBudget& budget, const DetectorSpec& det) {
  budget.validate();
  det.validate();
  const double coherence = budget.multipair_fraction / (budget.coherence_time_ps * 1e-12);
  const double timing = budget.multipair_fraction / (det.timing_resolution_ps * 1e-12);
  const double saturation =
      det.saturation_cps / (budget.transmission_linear() * det.efficiency * budget.singles_factor);
  PairRateLimit best{coherence, RateConstraint::CoherenceTime};
  if (timing < best.rate) best = {timing, RateConstraint::TimingResolution};
  if (saturation < best.rate) best = {saturation, RateConstraint::Saturation};
  return best;
}

double singles_rate(double pair_rate, const LinkBudget& budget, const DetectorSpec& det) {
  if (!(pair_rate >= 0.0)) throw InvalidParameter("pair rate must be non-negative");
  return pair_rate * budget.transmission_linear() * det.efficiency * budget.singles_factor;
}

double coincidence_rate(double pair_rate, const LinkBudget& budget, const DetectorSpec& det) {
  if (!(pair_rate >= 0.0)) throw InvalidParameter("pair rate must be non-negative");
  const double t = budget.transmission_linear() * det.efficiency;
  return pair_rate * t * t * budget.coincidence_factor;
}

double long_distance_ratio(int channels, double extra_loss_db) {
  const double loss = std::pow(10.0, extra_loss_db / 10.0);
  return channels / (loss * loss);
}

CapacityReport aggregate_capacity(const std::vector<ChannelPair>& pairs, const LinkBudget& budget,
                                  const LinkBudget& reference, const DetectorSpec& det,
                                  const SpectralEnvelope& envelope) {
  if (pairs.empty()) throw InvalidParameter("aggregate_capacity: no channel pairs");
  CapacityReport report;
  const auto limit = max_pair_rate(budget, det);
  for (const auto& pair : pairs) {
    PairCapacity row{pair,
                     limit.rate,
                     limit.binding,
                     singles_rate(limit.rate, budget, det),
                     coincidence_rate(limit.rate, budget, det),
                     spectrum_weight(pair, envelope)};
    report.total_coincidence_rate += row.coincidence_rate;
    report.per_pair.push_back(row);
  }
  report.reference_limit = max_pair_rate(reference, det);
  report.reference_coincidence_rate = coincidence_rate(report.reference_limit.rate, reference, det);
  report.ratio = report.total_coincidence_rate / report.reference_coincidence_rate;
  report.extra_loss_db = reference.transmission_db - budget.transmission_db;
  report.asymptotic_ratio = long_distance_ratio(static_cast<int>(pairs.size()), report.extra_loss_db);
  return report;
}

}  // namespace hyperent
