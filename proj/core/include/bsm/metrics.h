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

#ifndef BSM_METRICS_H_
#define BSM_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/design.h"
#include "bsm/gammatone.h"
#include "bsm/types.h"

namespace bsm {

// Reports clamp dB values at this floor (an exact match would be -inf).
inline constexpr double kDbFloor = -300.0;

double to_db_floored(double power_ratio);

// z(k, e) = c_e(f)^H v_k(f) for every bin: one K x 2 matrix per bin.
std::vector<ComplexMatrix> estimated_binaural(const FilterBank& bank, const std::vector<ComplexMatrix>& steering);

// Per bin: mean over ears of sum_k w_k |p - z|^2 / sum_k w_k |p|^2, in dB.
RealVector nmse_db(const std::vector<ComplexMatrix>& z, const std::vector<ComplexMatrix>& p,
                   std::span<const double> weights);

// As nmse_db with (|p| - |z|)^2 in the numerator.
RealVector magnitude_error_db(const std::vector<ComplexMatrix>& z, const std::vector<ComplexMatrix>& p,
                              std::span<const double> weights);

struct NamedBank {
  std::string name;
  const FilterBank* bank = nullptr;
};

struct MethodCurves {
  std::string name;
  RealVector nmse_db;              // band bins
  RealVector mag_error_db;         // band bins
  RealMatrix ild_db;               // L x centres
  RealMatrix ild_abs_error_db;     // L x centres
  RealVector ild_error_vs_freq;    // centres: mean over all L directions
  RealVector ild_error_vs_angle;   // L: mean over centres
};

struct EvalReport {
  std::vector<double> frequencies_hz;      // bins inside [band_lo, band_hi)
  std::vector<double> centers_hz;
  std::vector<double> horizontal_phi_deg;  // L, full circle
  RealMatrix target_ild_db;                // L x centres
  std::vector<MethodCurves> methods;
  nlohmann::json metadata = nlohmann::json::object();

  // Rows of the horizontal set with phi in [0, 180] deg (phi = -180 is
  // reported as 180), in ascending angle: the half plane shown in the
  // angle-resolved CSV.
  std::vector<std::pair<double, std::size_t>> half_plane_rows() const;
  const MethodCurves& method(const std::string& name) const;
};

// Complex, magnitude and ILD errors of each bank against the problem's
// targets. NMSE/magnitude use the K-direction grid over the ILD band;
// ILD uses the horizontal directions.
EvalReport ild_error_report(const DesignProblem& problem, std::span<const NamedBank> banks, const IldSpec& spec);

// Summary statistics used by the reports and acceptance checks.
double mean_ild_error_db(const MethodCurves& curves);
double mean_in_band(const RealVector& curve, std::span<const double> frequencies_hz, double lo_hz, double hi_hz);
double mean_ild_error_in_angles(const EvalReport& report, const MethodCurves& curves, double lo_deg, double hi_deg);

// Writes nmse.csv, magnitude.csv, ild_vs_freq.csv and ild_vs_angle.csv.
void write_report_csvs(const EvalReport& report, const std::filesystem::path& directory);

}  // namespace bsm

#endif  // BSM_METRICS_H_
