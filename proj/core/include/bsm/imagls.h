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

#ifndef BSM_IMAGLS_H_
#define BSM_IMAGLS_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "bsm/design.h"
#include "bsm/gammatone.h"
#include "bsm/lbfgs.h"
#include "bsm/types.h"

namespace bsm {

// sqrt(|x|^2 + eps): a differentiable stand-in for |x|.
double smooth_abs(double x, double eps);
double smooth_abs(Complex x, double eps);

// Trapezoid quadrature weights for (possibly non-uniform) nodes.
std::vector<double> trapezoid_weights(std::span<const double> nodes);

// Gammatone-weighted interaural level difference in dB,
//   10 log10( sum_f tau_f G(f0, f) (|left|^2 + eps) /
//             sum_f tau_f G(f0, f) (|right|^2 + eps) ),
// over the frequencies in [band_lo, band_hi). `left` and `right` are L x F
// spectra on `frequencies_hz`. Returns L x |centers|. A zero
// right-ear (or left-ear) power raises Error(kDegeneratePower).
RealMatrix ild_curve(const ComplexMatrix& left, const ComplexMatrix& right, const IldSpec& spec,
                     std::span<const double> frequencies_hz, double eps = 0.0);

enum class ImaglsInit { kMagls, kMse, kZeros };

// How the per-bin normalized magnitude errors are averaged over the band:
// equally per bin, or per unit of ERB rate (each bin weighted by its
// trapezoid width over ERB(f)), which matches the ERB spacing of the ILD
// centres.
enum class MagnitudeWeighting { kUniform, kErbRate };

std::string_view magnitude_weighting_name(MagnitudeWeighting weighting);
MagnitudeWeighting parse_magnitude_weighting(std::string_view name);

// Per-bin weights (summing to 1) for the band frequencies.
std::vector<double> magnitude_bin_weights(std::span<const double> band_frequencies_hz, MagnitudeWeighting weighting);

std::string_view imagls_init_name(ImaglsInit init);
ImaglsInit parse_imagls_init(std::string_view name);

struct ImaglsConfig {
  double lambda = 0.1;
  IldSpec ild_spec;  // band [f1, f2) doubles as the optimization band
  double smoothing_eps = 1e-12;
  int max_iter = 500;
  double grad_tol = 1e-6;
  int lbfgs_memory = 10;
  ImaglsInit init = ImaglsInit::kMagls;
  MagnitudeWeighting magnitude_weighting = MagnitudeWeighting::kUniform;
  bool apply_covariance_constraint = false;
  MaglsOptions magls;  // used to build the warm start when init = magls

  void validate() const;
};

struct LossRecord {
  int iteration = 0;
  double total = 0.0;
  double mag_left = 0.0;
  double mag_right = 0.0;
  double ild = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct LossBreakdown {
  double total = 0.0;      // 0.5 (mag_left + mag_right) + lambda ild_term
  double mag_left = 0.0;   // weighted mean over bins of normalized magnitude error (+ noise term)
  double mag_right = 0.0;
  double ild_term = 0.0;   // mean over directions and centres of |ILD error|
  std::vector<LossRecord> history;
};

// The iMagLS objective over all bins in the band jointly; the ILD term
// couples bins through the gammatone integrals, so there is one parameter
// vector of 4 * F_band * M reals, laid out as
//   x[((b * 2 + ear) * M + m) * 2 + {0: re, 1: im}].
class ImaglsObjective {
 public:
  ImaglsObjective(const DesignProblem& problem, const ImaglsConfig& config);

  std::size_t num_params() const;
  const std::vector<std::size_t>& band_bins() const { return band_bins_; }
  const RealMatrix& target_ild() const { return target_ild_; }  // L x centres

  RealVector pack(const FilterBank& bank) const;
  void unpack(const RealVector& x, FilterBank& bank) const;

  // Loss breakdown; if `grad` is non-null it receives d(total)/dx.
  LossBreakdown evaluate(const RealVector& x, RealVector* grad) const;

 private:
  const DesignProblem& problem_;
  ImaglsConfig config_;
  std::vector<std::size_t> band_bins_;
  std::vector<double> band_freqs_;
  std::vector<double> tau_;             // trapezoid weights over band bins
  std::vector<double> beta_;            // magnitude-term bin weights, sum 1
  RealMatrix gamma_;                    // centres x band bins
  RealMatrix target_amp_[2];            // per ear: K x band bins, |h|
  RealMatrix target_power_;             // band bins x 2, sum_k w |h|^2
  RealMatrix target_ild_;               // L x centres
  std::size_t mics_ = 0;
};

LossBreakdown imagls_loss(const FilterBank& bank, const DesignProblem& problem, const ImaglsConfig& config);

// Gradient of imagls_loss with respect to (Re c, Im c) of every coefficient
// in the band, returned as complex numbers Re-part + i Im-part in a bank
// shaped like the input (bins outside the band are zero).
FilterBank imagls_gradient(const FilterBank& bank, const DesignProblem& problem, const ImaglsConfig& config);

// Joint quasi-Newton minimization of the iMagLS loss from `initial`.
// Bins outside the band are copied from `initial`.
FilterBank optimize_imagls(const DesignProblem& problem, const ImaglsConfig& config, const FilterBank& initial,
                           LossBreakdown* breakdown = nullptr);

// Builds the warm start named by config.init, then optimizes.
FilterBank optimize_imagls(const DesignProblem& problem, const ImaglsConfig& config,
                           LossBreakdown* breakdown = nullptr);

// CSV with header: iter,total,mag_l,mag_r,ild,grad_norm,step
void write_history_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path);

}  // namespace bsm

#endif  // BSM_IMAGLS_H_
