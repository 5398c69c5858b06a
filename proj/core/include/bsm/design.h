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

#ifndef BSM_DESIGN_H_
#define BSM_DESIGN_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/array_model.h"
#include "bsm/hrtf.h"
#include "bsm/types.h"

namespace bsm {

// Steering and target responses on an auxiliary direction set (the
// horizontal-plane ILD directions), one matrix per frequency bin.
struct DirectionalData {
  std::vector<Direction> directions;     // L
  std::vector<ComplexMatrix> steering;   // per bin, M x L
  std::vector<ComplexMatrix> target;     // per bin, L x 2 (left, right HRTF)

  bool empty() const { return directions.empty(); }
};

struct DesignProblem {
  std::vector<double> frequencies_hz;    // F
  std::vector<ComplexMatrix> steering;   // per bin, M x K
  std::vector<ComplexMatrix> target;     // per bin, K x 2 (left, right HRTF)
  std::vector<double> weights;           // K quadrature weights, sum 1
  double noise_to_signal = 1e-4;         // sigma_n^2 / sigma_s^2
  DirectionalData horizontal;            // optional

  std::size_t num_bins() const { return frequencies_hz.size(); }
  std::size_t num_mics() const { return steering.empty() ? 0 : steering.front().rows(); }
  std::size_t num_directions() const { return weights.size(); }
  void validate() const;
};

// Steering matrices for every HRTF bin on the HRTF grid. `horizontal`, when
// given, must share the frequency grid and supplies the ILD directions.
DesignProblem make_design_problem(const ArrayGeometry& geometry, const HrtfSet& hrtf,
                                  double noise_to_signal, const HrtfSet* horizontal = nullptr);

enum class DesignKind { kMse, kMagls, kImagls };

std::string_view design_kind_name(DesignKind kind);
DesignKind parse_design_kind(std::string_view name);

struct FilterBank {
  std::vector<double> frequencies_hz;  // F
  std::vector<ComplexMatrix> coeffs;   // per bin, M x 2: columns c^l, c^r
  DesignKind kind = DesignKind::kMse;
  double crossover_hz = 0.0;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t num_bins() const { return frequencies_hz.size(); }
  std::size_t num_mics() const { return coeffs.empty() ? 0 : coeffs.front().rows(); }
  void validate() const;
};

// Closed-form diffuse-field MSE solution per bin,
//   C = (V W V^H + (sigma_n^2/sigma_s^2) I)^-1 V W conj(H),
// with W the grid weights. Escalating diagonal loading (1e-12, 1e-10, 1e-8
// of trace/M) handles bins whose Cholesky factorization fails; with zero
// regularization a singular bin raises Error(kSingularSystem).
FilterBank mse_filters(const DesignProblem& problem);

// Starting phase of each bin's variable exchange: the constant
// init_phase_rad, or the phase the previous bin's filters produce on this
// bin's directions (continuation across frequency, processed in order, so
// neighbouring bins settle in the same basin and the bank stays smooth
// enough to realize as a short FIR).
enum class MaglsPhaseInit { kConstant, kPreviousBin };

std::string_view magls_phase_init_name(MaglsPhaseInit init);
MaglsPhaseInit parse_magls_phase_init(std::string_view name);

struct MaglsOptions {
  double init_phase_rad = kPi / 2;
  MaglsPhaseInit phase_init = MaglsPhaseInit::kConstant;
  double tol = 1e-20;
  int max_iter = 100000;
  bool relative_tol = false;
  // Bins outside [band_lo_hz, band_hi_hz) keep the MSE solution.
  double band_lo_hz = 0.0;
  double band_hi_hz = 1e300;
  bool record_history = false;
};

struct MaglsBinReport {
  std::size_t bin = 0;
  int iterations = 0;
  double final_loss = 0.0;       // sum_e sum_k w_k (|h| - |z|)^2 + r ||c_e||^2
  double magnitude_loss = 0.0;   // normalized by target power, mean over ears
  std::vector<double> history;   // loss per accepted iterate (if recorded)
};

// Variable-exchange MagLS. Each iterate solves the MSE system against the
// target |h| e^{i phi}, then sets phi to the phase of the rendered output.
// The first bin of the band continues from the MSE solution below it when
// phase_init = kPreviousBin (or uses init_phase_rad if there is none).
// Stops once the loss decrease falls below `tol` or after max_iter solves.
FilterBank magls_filters(const DesignProblem& problem, const MaglsOptions& options,
                         std::vector<MaglsBinReport>* reports = nullptr);

// Normalized magnitude loss of one bin and ear:
//   sum_k w_k (|h_k| - |z_k|)^2 / sum_k w_k |h_k|^2.
double magnitude_loss(const ComplexMatrix& steering, const ComplexMatrix& target,
                      std::span<const double> weights, const ComplexMatrix& coeffs, int ear);

// Rendered diffuse-field covariance R = Y^H W Y with Y = V^H C (2 x 2), and
// the matching target covariance conj(H)^H W conj(H).
Eigen::Matrix2cd rendered_covariance(const ComplexMatrix& steering, std::span<const double> weights,
                                     const ComplexMatrix& coeffs);
Eigen::Matrix2cd target_covariance(const ComplexMatrix& target, std::span<const double> weights);

// Right-multiplies each bin's C by L_e^-H L_t^H so the rendered 2x2 diffuse
// covariance equals the HRTF's. Bins outside [band_lo, band_hi) are left
// untouched.
FilterBank apply_covariance_constraint(const FilterBank& bank, const DesignProblem& problem,
                                       double band_lo_hz = 0.0, double band_hi_hz = 1e300);

// Native filter container:
//   "BSMF" | u32 version=1 | u32 F | u32 M | f64 crossover_hz |
//   f64 freq[F] | coeffs (re,im)[F*M*2] row-major over (bin, mic, ear) |
//   u32 n | n bytes of JSON metadata (carries "kind").
inline constexpr std::uint32_t kFilterBankVersion = 1;

std::vector<std::uint8_t> encode_filter_bank(const FilterBank& bank);
FilterBank decode_filter_bank(std::span<const std::uint8_t> bytes);
void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path);
FilterBank load_filter_bank(const std::filesystem::path& path);

}  // namespace bsm

#endif  // BSM_DESIGN_H_
