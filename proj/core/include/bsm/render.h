// Copyright 2026 The BSM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BSM_RENDER_H_
#define BSM_RENDER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/array_model.h"
#include "bsm/design.h"
#include "bsm/types.h"

namespace bsm {

inline constexpr double kDefaultSampleRate = 48000.0;
inline constexpr int kDefaultDftSize = 2048;
inline constexpr int kDefaultTaps = 1024;
inline constexpr int kMinTaps = 128;

struct MultichannelAudio {
  double sample_rate_hz = kDefaultSampleRate;
  RealMatrix samples;  // channels x frames

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index frames() const { return samples.cols(); }
};

// Joins a low-frequency and a high-frequency bank on the same grid with a
// raised-cosine crossfade on log frequency, one octave wide and centred on
// `crossover_hz`. The result carries the high bank's kind.
FilterBank crossover_merge(const FilterBank& low, const FilterBank& high, double crossover_hz);

// Real FIR taps per ear: taps[e] is M x taps.
struct FirSet {
  double sample_rate_hz = kDefaultSampleRate;
  std::array<RealMatrix, 2> taps;
  nlohmann::json metadata = nlohmann::json::object();

  Eigen::Index num_mics() const { return taps[0].rows(); }
  Eigen::Index num_taps() const { return taps[0].cols(); }
  void validate() const;
};

// Impulse response of a half spectrum (bins 0..N/2 of an N-point DFT),
// circularly shifted by taps/2 and shaped by a periodic Hann window.
// `taps` must be a power of two no smaller than kMinTaps.
std::vector<double> response_to_fir(std::span<const Complex> half_spectrum, int taps);

// Converts a bank on the uniform grid 0, fs/N, ..., fs/2 into FIR taps.
// Responses are modelled with exp(-i 2 pi f t) time dependence, so a DFT of
// sampled signals sees their conjugates: a microphone signal has spectrum
// conj(v) S and the ear signal sum_m fir[e][m] * x_m has spectrum
// c_e^T conj(v) S = conj(c_e^H v) S. The microphone filter is thus IDFT(c).
FirSet filters_to_fir(const FilterBank& bank, int taps, double sample_rate_hz = kDefaultSampleRate);

// Overlap-add convolution: 2 x (frames + taps - 1).
RealMatrix render_binaural(const MultichannelAudio& mics, const FirSet& fir);

// Free-field signals of a source at `direction` observed by the array:
// each microphone's FIR is the IDFT of its conjugated steering response.
MultichannelAudio simulate_mic_signals(const ArrayGeometry& geometry, std::span<const double> source,
                                       const Direction& direction, double sample_rate_hz = kDefaultSampleRate,
                                       int taps = kDefaultTaps, int dft_size = kDefaultDftSize);

// FIR container:
//   "BSMR" | u32 version=1 | u32 taps | u32 M | f64 sample_rate |
//   f64 taps[2*M*taps] ordered (ear, mic, tap) | u32 n | JSON metadata
//   with "kind": "fir".
inline constexpr std::uint32_t kFirVersion = 1;

std::vector<std::uint8_t> encode_fir(const FirSet& fir);
FirSet decode_fir(std::span<const std::uint8_t> bytes);
void save_fir(const FirSet& fir, const std::filesystem::path& path);
FirSet load_fir(const std::filesystem::path& path);

}  // namespace bsm

#endif  // BSM_RENDER_H_
