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

#ifndef BSM_TOOLS_CONFIG_H_
#define BSM_TOOLS_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/array_model.h"
#include "bsm/design.h"
#include "bsm/imagls.h"

namespace bsm::tools {

// Everything one experiment needs, read from an INI-style file with
// [section] headers and `key = value` lines. Unknown sections or keys are
// rejected. Relative paths resolve against the config file's directory.
struct ExperimentConfig {
  // [array]
  std::string geometry = "builtin:semicircular6";  // or a geometry file path

  // [hrtf]
  std::string hrtf = "synthetic";  // or a BSMD file path
  double sample_rate_hz = 48000.0;
  int dft_size = 2048;
  int grid_theta = 20;  // synthetic: Gauss-Legendre rings
  int grid_phi = 25;    // synthetic: azimuths per ring
  double head_radius_m = 0.0875;
  int horizontal_count = 72;              // synthetic: horizontal ring size
  double horizontal_tolerance_deg = 0.5;  // file: elevation slack of the plane

  // [design]
  std::vector<DesignKind> methods = {DesignKind::kMse, DesignKind::kMagls, DesignKind::kImagls};
  double band_lo_hz = 1500.0;
  double band_hi_hz = 20000.0;
  double noise_to_signal = 1e-4;
  double crossover_hz = 1500.0;
  bool magls_covariance_constraint = true;

  // [magls]
  MaglsOptions magls;  // band fields are filled from [design]

  // [imagls]
  ImaglsConfig imagls;  // ild_spec is built from [design] and erb_step
  double erb_step = 1.0;
  std::vector<double> lambda_sweep;  // empty: single run at imagls.lambda
  double sweep_max_degradation_db = 1.0;
  double sweep_max_magnitude_error_db = -10.0;

  // [render]
  int taps = 1024;

  // [output]
  std::string output_directory;

  void validate() const;
  // Canonical text form: parsing it again yields the same config.
  std::string to_ini() const;
  nlohmann::json to_json() const;
};

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_directory);
ExperimentConfig load_config(const std::filesystem::path& path);

// "builtin:semicircular6" or a geometry file.
ArrayGeometry resolve_geometry(const ExperimentConfig& config);

// Comma-separated numbers; `name` labels errors.
std::vector<double> parse_number_list(const std::string& name, const std::string& text);

// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace bsm::tools

#endif  // BSM_TOOLS_CONFIG_H_
