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

#ifndef BSM_TOOLS_EXPERIMENT_H_
#define BSM_TOOLS_EXPERIMENT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/design.h"
#include "bsm/gammatone.h"
#include "bsm/imagls.h"
#include "bsm/metrics.h"
#include "config.h"

namespace bsm::tools {

// The design problem a config describes, with the files it was built from.
struct Experiment {
  ExperimentConfig config;
  ArrayGeometry geometry;
  DesignProblem problem;
  IldSpec ild_spec;
  double sample_rate_hz = 0.0;
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;  // label, path
  nlohmann::json description = nlohmann::json::object();
};

Experiment prepare_experiment(const ExperimentConfig& config);

MaglsOptions magls_options(const Experiment& experiment);
ImaglsConfig imagls_config(const Experiment& experiment, double lambda);

// Headline statistics of one method in an evaluation report.
struct MethodSummary {
  std::string name;
  double mean_ild_error_db = 0.0;         // all horizontal directions and centres
  double mag_error_low_band_db = 0.0;     // mean of dB values over 1.5-5 kHz
  double mean_mag_error_db = 0.0;         // mean of dB values over the band
  double mean_nmse_db = 0.0;
  double frontal_ild_error_db = 0.0;      // 0-100 deg
  double rear_ild_error_db = 0.0;         // 140-180 deg
};

inline constexpr double kLowBandLoHz = 1500.0;
inline constexpr double kLowBandHiHz = 5000.0;
inline constexpr double kFrontalLoDeg = 0.0;
inline constexpr double kFrontalHiDeg = 100.0;
inline constexpr double kRearLoDeg = 140.0;
inline constexpr double kRearHiDeg = 180.0;
// Reference ILD-error improvement of the ILD-informed design over MagLS on
// a measured head, and the band within which a measured-HRTF run is
// flagged as reproducing it.
inline constexpr double kReferenceIldImprovementDb = 3.8;
inline constexpr double kReferenceIldToleranceDb = 1.5;

MethodSummary summarize(const EvalReport& report, const MethodCurves& curves);
nlohmann::json to_json(const MethodSummary& summary);

// Comparison of a candidate (imagls) against a baseline (magls) summary.
nlohmann::json compare(const MethodSummary& baseline, const MethodSummary& candidate, bool measured_hrtf);

}  // namespace bsm::tools

#endif  // BSM_TOOLS_EXPERIMENT_H_
