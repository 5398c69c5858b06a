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

#include "bsm/render.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "binary_io.h"
#include "bsm/error.h"
#include "bsm/hrtf.h"

namespace bsm {
namespace {

constexpr char kMagic[] = "BSMR";

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_taps(int taps) {
  if (taps < kMinTaps || !is_power_of_two(taps)) {
    throw Error(ErrorCode::kInsufficientTaps,
                "taps must be a power of two >= " + std::to_string(kMinTaps) + ", got " + std::to_string(taps));
  }
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDestroy>;

template <typename T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

// Real <-> half-complex transform pair of a fixed size, reusing its buffers.
class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n), real_(fftw_buffer<double>(n)), spec_(fftw_buffer<fftw_complex>(n / 2 + 1)) {
    forward_.reset(fftw_plan_dft_r2c_1d(n, real_.get(), spec_.get(), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(n, spec_.get(), real_.get(), FFTW_ESTIMATE));
    if (!forward_ || !inverse_) throw Error(ErrorCode::kDomain, "FFT planning failed");
  }

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }
  double* real() { return real_.get(); }
  Complex* spectrum() { return reinterpret_cast<Complex*>(spec_.get()); }
  void forward() { fftw_execute(forward_.get()); }
  // Unnormalized: the caller scales by 1/n.
  void inverse() { fftw_execute(inverse_.get()); }

 private:
  int n_;
  std::unique_ptr<double[], FftwFree> real_;
  std::unique_ptr<fftw_complex[], FftwFree> spec_;
  PlanPtr forward_;
  PlanPtr inverse_;
};

int convolution_size(int taps) {
  int n = 1;
  while (n < 2 * taps) n <<= 1;
  return std::max(n, 256);
}

// Overlap-add of `inputs` (channels x frames) through filters[o][c]
// (outputs x channels, each of `taps` samples): outputs x (frames + taps - 1).
RealMatrix overlap_add(const RealMatrix& inputs, const std::vector<std::vector<const double*>>& filters, int taps) {
  const auto channels = inputs.rows();
  const auto frames = inputs.cols();
  const auto outputs = static_cast<Eigen::Index>(filters.size());
  const int n = convolution_size(taps);
  const int block = n - taps + 1;
  RealFft fft(n);
  const int bins = fft.bins();

  std::vector<ComplexMatrix> filter_spectra(static_cast<std::size_t>(outputs), ComplexMatrix(channels, bins));
  for (Eigen::Index o = 0; o < outputs; ++o) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      std::fill(fft.real(), fft.real() + n, 0.0);
      std::copy(filters[o][c], filters[o][c] + taps, fft.real());
      fft.forward();
      for (int b = 0; b < bins; ++b) filter_spectra[o](c, b) = fft.spectrum()[b];
    }
  }

  RealMatrix out = RealMatrix::Zero(outputs, frames + taps - 1);
  ComplexMatrix input_spectra(channels, bins);
  for (Eigen::Index start = 0; start < frames; start += block) {
    const Eigen::Index len = std::min<Eigen::Index>(block, frames - start);
    for (Eigen::Index c = 0; c < channels; ++c) {
      std::fill(fft.real(), fft.real() + n, 0.0);
      for (Eigen::Index i = 0; i < len; ++i) fft.real()[i] = inputs(c, start + i);
      fft.forward();
      for (int b = 0; b < bins; ++b) input_spectra(c, b) = fft.spectrum()[b];
    }
    const Eigen::Index valid = std::min<Eigen::Index>(len + taps - 1, out.cols() - start);
    for (Eigen::Index o = 0; o < outputs; ++o) {
      for (int b = 0; b < bins; ++b) {
        Complex acc = 0.0;
        for (Eigen::Index c = 0; c < channels; ++c) acc += filter_spectra[o](c, b) * input_spectra(c, b);
        fft.spectrum()[b] = acc;
      }
      fft.inverse();
      for (Eigen::Index i = 0; i < valid; ++i) out(o, start + i) += fft.real()[i] / n;
    }
  }
  return out;
}

void check_uniform_grid(const std::vector<double>& freqs, double sample_rate_hz, int& dft_size) {
  if (freqs.size() < 2) throw Error(ErrorCode::kGridMismatch, "bank needs at least two bins");
  dft_size = static_cast<int>(2 * (freqs.size() - 1));
  const auto grid = dft_frequency_grid(sample_rate_hz, dft_size);
  const double spacing = sample_rate_hz / dft_size;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (std::abs(freqs[i] - grid[i]) > 1e-6 * spacing) {
      throw Error(ErrorCode::kGridMismatch, "bank frequencies are not the uniform DFT grid 0..fs/2 of " +
                                                std::to_string(dft_size) + " points at " +
                                                std::to_string(sample_rate_hz) + " Hz");
    }
  }
}

}  // namespace

FilterBank crossover_merge(const FilterBank& low, const FilterBank& high, double crossover_hz) {
  low.validate();
  high.validate();
  if (low.frequencies_hz != high.frequencies_hz || low.num_mics() != high.num_mics()) {
    throw Error(ErrorCode::kGridMismatch, "crossover banks differ in grid or microphone count");
  }
  if (!(crossover_hz > 0.0) || !std::isfinite(crossover_hz)) {
    throw Error(ErrorCode::kConfig, "crossover frequency must be positive");
  }
  FilterBank out = high;
  out.crossover_hz = crossover_hz;
  for (std::size_t f = 0; f < out.num_bins(); ++f) {
    const double freq = out.frequencies_hz[f];
    double w = 0.0;  // weight of the high bank
    if (freq > 0.0) {
      const double octaves = std::log2(freq / crossover_hz);
      if (octaves >= 0.5) {
        w = 1.0;
      } else if (octaves > -0.5) {
        w = 0.5 - 0.5 * std::cos(kPi * (octaves + 0.5));
      }
    }
    out.coeffs[f] = (1.0 - w) * low.coeffs[f] + w * high.coeffs[f];
  }
  out.metadata["crossover_low_kind"] = design_kind_name(low.kind);
  return out;
}

void FirSet::validate() const {
  if (taps[0].rows() == 0 || taps[0].cols() == 0 || taps[0].rows() != taps[1].rows() ||
      taps[0].cols() != taps[1].cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "FIR ears must share a non-empty M x taps shape");
  }
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::kConfig, "FIR sample rate must be positive");
  }
  if (!taps[0].allFinite() || !taps[1].allFinite()) throw Error(ErrorCode::kNonFinite, "FIR taps contain NaN/inf");
}

std::vector<double> response_to_fir(std::span<const Complex> half_spectrum, int taps) {
  check_taps(taps);
  if (half_spectrum.size() < 2) throw Error(ErrorCode::kGridMismatch, "half spectrum needs at least two bins");
  const int n = static_cast<int>(2 * (half_spectrum.size() - 1));
  RealFft fft(n);
  std::copy(half_spectrum.begin(), half_spectrum.end(), fft.spectrum());
  fft.inverse();
  std::vector<double> fir(static_cast<std::size_t>(taps), 0.0);
  for (int i = 0; i < taps; ++i) {
    const int t = i - taps / 2;
    if (t < -n / 2 || t >= n / 2) continue;
    const int src = ((t % n) + n) % n;
    const double window = 0.5 - 0.5 * std::cos(2.0 * kPi * i / taps);
    fir[static_cast<std::size_t>(i)] = fft.real()[src] / n * window;
  }
  return fir;
}

FirSet filters_to_fir(const FilterBank& bank, int taps, double sample_rate_hz) {
  check_taps(taps);
  bank.validate();
  int dft_size = 0;
  check_uniform_grid(bank.frequencies_hz, sample_rate_hz, dft_size);
  FirSet fir;
  fir.sample_rate_hz = sample_rate_hz;
  const auto M = static_cast<Eigen::Index>(bank.num_mics());
  std::vector<Complex> spectrum(bank.num_bins());
  for (int e = 0; e < 2; ++e) {
    fir.taps[e].resize(M, taps);
    for (Eigen::Index m = 0; m < M; ++m) {
      for (std::size_t f = 0; f < bank.num_bins(); ++f) spectrum[f] = bank.coeffs[f](m, e);
      const auto h = response_to_fir(spectrum, taps);
      for (int i = 0; i < taps; ++i) fir.taps[e](m, i) = h[static_cast<std::size_t>(i)];
    }
  }
  fir.metadata = bank.metadata;
  fir.metadata["source_kind"] = design_kind_name(bank.kind);
  fir.metadata["design_dft_size"] = dft_size;
  return fir;
}

RealMatrix render_binaural(const MultichannelAudio& mics, const FirSet& fir) {
  fir.validate();
  if (mics.channels() != fir.num_mics()) {
    throw Error(ErrorCode::kChannelMismatch, "audio has " + std::to_string(mics.channels()) +
                                                 " channels, filters expect " + std::to_string(fir.num_mics()));
  }
  if (std::abs(mics.sample_rate_hz - fir.sample_rate_hz) > 1e-9) {
    throw Error(ErrorCode::kChannelMismatch, "audio sample rate differs from the filter sample rate");
  }
  if (!mics.samples.allFinite()) throw Error(ErrorCode::kNonFinite, "audio contains NaN/inf");
  std::vector<std::vector<const double*>> filters(2);
  // Eigen matrices are column-major; copy rows so each filter is contiguous.
  std::array<RealMatrix, 2> rows_major = {fir.taps[0].transpose(), fir.taps[1].transpose()};
  for (int e = 0; e < 2; ++e) {
    for (Eigen::Index m = 0; m < fir.num_mics(); ++m) filters[e].push_back(rows_major[e].col(m).data());
  }
  return overlap_add(mics.samples, filters, static_cast<int>(fir.num_taps()));
}

MultichannelAudio simulate_mic_signals(const ArrayGeometry& geometry, std::span<const double> source,
                                       const Direction& direction, double sample_rate_hz, int taps, int dft_size) {
  check_taps(taps);
  geometry.validate();
  if (dft_size < 2 || dft_size % 2 != 0) throw Error(ErrorCode::kConfig, "DFT size must be even");
  if (!direction.valid()) throw Error(ErrorCode::kDomain, "source direction out of range");
  const auto freqs = dft_frequency_grid(sample_rate_hz, dft_size);
  const auto M = static_cast<Eigen::Index>(geometry.mic_directions.size());
  std::vector<std::vector<Complex>> spectra(static_cast<std::size_t>(M), std::vector<Complex>(freqs.size()));
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    const double ka = wavenumber(freqs[f]) * geometry.radius_m;
    const auto v = steering_vector(geometry, freqs[f], direction, truncation_order(ka, geometry.baffle));
    for (Eigen::Index m = 0; m < M; ++m) spectra[m][f] = std::conj(v(m));
  }
  RealMatrix filters(taps, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const auto h = response_to_fir(spectra[m], taps);
    for (int i = 0; i < taps; ++i) filters(i, m) = h[static_cast<std::size_t>(i)];
  }
  RealMatrix input(1, static_cast<Eigen::Index>(source.size()));
  for (std::size_t i = 0; i < source.size(); ++i) input(0, static_cast<Eigen::Index>(i)) = source[i];
  std::vector<std::vector<const double*>> per_mic(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) per_mic[m].push_back(filters.col(m).data());
  MultichannelAudio out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples = overlap_add(input, per_mic, taps);
  return out;
}

std::vector<std::uint8_t> encode_fir(const FirSet& fir) {
  fir.validate();
  internal::ByteWriter w;
  w.magic(kMagic);
  w.u32(kFirVersion);
  w.u32(static_cast<std::uint32_t>(fir.num_taps()));
  w.u32(static_cast<std::uint32_t>(fir.num_mics()));
  w.f64(fir.sample_rate_hz);
  for (int e = 0; e < 2; ++e) {
    for (Eigen::Index m = 0; m < fir.num_mics(); ++m) {
      for (Eigen::Index i = 0; i < fir.num_taps(); ++i) w.f64(fir.taps[e](m, i));
    }
  }
  nlohmann::json meta = fir.metadata;
  meta["kind"] = "fir";
  w.text(meta.dump());
  return w.take();
}

FirSet decode_fir(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::kTruncated, "file shorter than magic");
  internal::ByteReader r(bytes);
  if (!r.magic(kMagic)) throw Error(ErrorCode::kBadMagic, "not a BSMR FIR container");
  const std::uint32_t version = r.u32();
  if (version != kFirVersion) throw Error(ErrorCode::kBadVersion, "unsupported BSMR version " + std::to_string(version));
  const std::uint32_t taps = r.u32();
  const std::uint32_t M = r.u32();
  if (taps == 0 || M == 0) throw Error(ErrorCode::kDimensionMismatch, "taps and M must be positive");
  if (r.remaining() < 8ULL + 16ULL * taps * M + 4ULL) {
    throw Error(ErrorCode::kTruncated, "payload shorter than declared taps, M");
  }
  FirSet fir;
  fir.sample_rate_hz = r.f64();
  for (int e = 0; e < 2; ++e) {
    fir.taps[e].resize(M, taps);
    for (Eigen::Index m = 0; m < M; ++m) {
      for (Eigen::Index i = 0; i < taps; ++i) fir.taps[e](m, i) = r.f64();
    }
  }
  const std::string meta = r.text();
  if (r.remaining() != 0) throw Error(ErrorCode::kDimensionMismatch, "trailing bytes after metadata");
  try {
    fir.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!fir.metadata.is_object() || fir.metadata.value("kind", "") != "fir") {
    throw Error(ErrorCode::kUnsupportedFormat, "metadata lacks the fir kind tag");
  }
  fir.metadata.erase("kind");
  fir.validate();
  return fir;
}

void save_fir(const FirSet& fir, const std::filesystem::path& path) { internal::write_file(path, encode_fir(fir)); }

FirSet load_fir(const std::filesystem::path& path) { return decode_fir(internal::read_file(path)); }

}  // namespace bsm
