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

// ITU 100 GHz grid arithmetic, energy-conservation channel pairing, the
// SPDC spectral envelope and the multi-constraint pair-rate budget.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyperent {

inline constexpr double kSpeedOfLightNmTHz = 299792.458;  // c in nm * THz

/// ITU channel n on the 100 GHz grid, f = 190.0 THz + n * 0.1 THz.
/// Frequencies are held as integer GHz so grid sums are exact.
class ItuChannel {
 public:
  static constexpr int kMinNumber = 0;
  static constexpr int kMaxNumber = 72;  // 190.0 .. 197.2 THz
  static constexpr std::int64_t kSpacingGhz = 100;
  static constexpr std::int64_t kOriginGhz = 190'000;

  /// Throws InvalidParameter outside [kMinNumber, kMaxNumber].
  explicit ItuChannel(int number);

  int number() const { return number_; }
  std::int64_t frequency_ghz() const { return kOriginGhz + kSpacingGhz * number_; }
  double frequency_thz() const { return static_cast<double>(frequency_ghz()) / 1000.0; }
  double wavelength_nm() const { return kSpeedOfLightNmTHz / frequency_thz(); }
  double width_thz() const { return static_cast<double>(kSpacingGhz) / 1000.0; }

  auto operator<=>(const ItuChannel&) const = default;

 private:
  int number_;
};

double frequency_to_wavelength_nm(double thz);
double wavelength_to_frequency_thz(double nm);

/// Signal (long wavelength, lower channel number) and idler channels of one
/// energy-conserving pair.
struct ChannelPair {
  ItuChannel signal;
  ItuChannel idler;
  int pair_sum;

  std::int64_t sum_frequency_ghz() const { return signal.frequency_ghz() + idler.frequency_ghz(); }
  /// Pump wavelength from 1/lambda_p = 1/lambda_s + 1/lambda_i.
  double pump_wavelength_nm() const;
  std::string label() const;  // "ITU10-33"

  bool operator==(const ChannelPair&) const = default;
};

inline constexpr int kDefaultPairSum = 43;

/// Partner of channel n is pair_sum - n; the lower number is the signal.
ChannelPair pair_for(int n, int pair_sum = kDefaultPairSum);

/// The five pairs ITU10-33 .. ITU14-29.
std::vector<ChannelPair> default_channel_pairs();

enum class EnvelopeShape { Gaussian, Sinc2 };

struct SpectralEnvelope {
  double center_nm = 1560.0;
  double fwhm_nm = 40.0;
  EnvelopeShape shape = EnvelopeShape::Gaussian;

  /// Peak-normalized envelope value at `nm`.
  double value(double nm) const;
};

/// Mean of the peak-normalized envelope over the signal channel's band.
double spectrum_weight(const ChannelPair& pair, const SpectralEnvelope& envelope = {});

struct DetectorSpec {
  double efficiency = 0.2;
  double timing_resolution_ps = 100.0;
  double saturation_cps = 20e3;

  void validate() const;
};

struct LinkBudget {
  double transmission_db = -13.0;   // per photon, source to detector, excl. efficiency
  double singles_factor = 0.25;     // analyzer routing seen by one detector
  double coincidence_factor = 0.125;  // joint analyzer + central-slot post-selection
  double coherence_time_ps = 5.0;
  int channel_count = 5;
  // Fraction of the inverse coherence / timing time allowed for multi-pair
  // suppression.
  double multipair_fraction = 0.05;

  double transmission_linear() const;
  void validate() const;
};

enum class RateConstraint { CoherenceTime, TimingResolution, Saturation };

std::string_view to_string(RateConstraint c);

struct PairRateLimit {
  double rate;  // pairs / s per channel at the source
  RateConstraint binding;
};

PairRateLimit max_pair_rate(const LinkBudget& budget, const DetectorSpec& det);

/// R T eta (singles factor): counts/s on one detector.
double singles_rate(double pair_rate, const LinkBudget& budget, const DetectorSpec& det);
/// R (T eta)^2 (coincidence factor): detected coincidences/s.
double coincidence_rate(double pair_rate, const LinkBudget& budget, const DetectorSpec& det);

struct PairCapacity {
  ChannelPair pair;
  double pair_rate;
  RateConstraint binding;
  double singles_rate;
  double coincidence_rate;
  double spectrum_weight;
};

struct CapacityReport {
  std::vector<PairCapacity> per_pair;
  double total_coincidence_rate = 0.0;
  PairRateLimit reference_limit{0.0, RateConstraint::Saturation};
  double reference_coincidence_rate = 0.0;  // single channel, no demultiplexing
  double ratio = 0.0;                       // total / reference
  double extra_loss_db = 0.0;               // reference - DWDM transmission
  double asymptotic_ratio = 0.0;            // channels / (extra linear loss)^2
};

/// Capacity of the multiplexed channel pairs under `budget` against a
/// single undemultiplexed channel under `reference`.
CapacityReport aggregate_capacity(const std::vector<ChannelPair>& pairs, const LinkBudget& budget,
                                  const LinkBudget& reference, const DetectorSpec& det,
                                  const SpectralEnvelope& envelope = {});

/// n_channels / (10^(extra_loss_db/10))^2.
double long_distance_ratio(int channels, double extra_loss_db);

}  // namespace hyperent
