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

#ifndef BSM_ARRAY_MODEL_H_
#define BSM_ARRAY_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsm/types.h"

namespace bsm {

enum class Baffle { kRigidSphere, kOpen };

std::string_view baffle_name(Baffle baffle);
Baffle parse_baffle(std::string_view name);

struct ArrayGeometry {
  double radius_m = 0.10;
  std::vector<Direction> mic_directions;
  Baffle baffle = Baffle::kRigidSphere;

  // Six microphones on the horizontal plane of a 10 cm rigid sphere at
  // azimuths +-22, +-45, +-65 degrees (a glasses/headset-style layout).
  // Ordered as left/right pairs: (+22, -22, +45, -45, +65, -65).
  static ArrayGeometry semicircular6();

  std::size_t num_mics() const { return mic_directions.size(); }
  void validate() const;
  std::uint64_t fingerprint() const;
};

// Plain-text geometry description:
//   radius_m = 0.1
//   baffle = rigid_sphere        (or "open")
//   mic = 90, 22                 (theta_deg, phi_deg; one line per mic)
// '#' starts a comment.
ArrayGeometry parse_geometry(std::string_view text);
ArrayGeometry load_geometry(const std::filesystem::path& path);
std::string format_geometry(const ArrayGeometry& geometry);

double wavenumber(double frequency_hz);

// Radial (mode-strength) function of a plane wave on the sphere surface,
//   rigid: b_n = 4 pi (-i)^n [ j_n(ka) - j_n'(ka) / h_n'(ka) * h_n(ka) ]
//   open:  b_n = 4 pi (-i)^n j_n(ka)
// with h = h^(1). The (-i)^n factor expands exp(-i k r_s . r), the field of a
// plane wave arriving from the source direction r_s under this project's
// exp(-i 2 pi f t) convention.
Complex radial_function_bn(int n, double ka, Baffle baffle);
std::vector<Complex> radial_functions(int n_max, double ka, Baffle baffle);

// Smallest N >= ceil(ka) + 10 with |b_N| / max_n |b_n| < 1e-12, capped at 120.
int truncation_order(double ka, Baffle baffle = Baffle::kRigidSphere);

// Pressure at each microphone for a unit plane wave from `source`,
// referenced to the incident wave at the sphere centre:
//   v_m = sum_{n<=order} b_n(ka) (2n+1)/(4 pi) P_n(cos angle(mic_m, source)).
ComplexVector steering_vector(const ArrayGeometry& geometry, double frequency_hz,
                              const Direction& source, int order);

struct SteeringMatrix {
  double frequency_hz = 0.0;
  ComplexMatrix entries;  // M x K, column k <-> grid[k]
  std::uint64_t geometry_fingerprint = 0;
  std::uint64_t grid_fingerprint = 0;
  int order = 0;
  bool truncation_warning = false;  // order < ceil(ka)
};

SteeringMatrix steering_matrix(const ArrayGeometry& geometry, double frequency_hz,
                               std::span<const Direction> grid, int order);

// Uses truncation_order(ka) for the geometry's baffle.
SteeringMatrix steering_matrix(const ArrayGeometry& geometry, double frequency_hz,
                               std::span<const Direction> grid);

std::uint64_t fingerprint(std::span<const Direction> directions);

}  // namespace bsm

#endif  // BSM_ARRAY_MODEL_H_
