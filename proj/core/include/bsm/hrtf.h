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

#ifndef BSM_HRTF_H_
#define BSM_HRTF_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsm/types.h"

namespace bsm {

struct SphericalGrid {
  std::vector<Direction> directions;
  std::vector<double> weights;  // quadrature weights, sum to 1

  std::size_t size() const { return directions.size(); }
  void validate() const;
};

// Gauss-Legendre nodes in cos(theta) times n_phi equispaced azimuths
// phi_j = -pi + 2 pi j / n_phi. Exact weights; mirror-symmetric in phi.
SphericalGrid gauss_product_grid(int n_theta, int n_phi);

// Quasi-uniform golden-angle spiral with equal weights.
SphericalGrid fibonacci_grid(int count);

// `count` equispaced directions on the horizontal plane starting at -pi.
SphericalGrid horizontal_ring(int count);

// k * fs / dft_size for k = 0 .. dft_size / 2.
std::vector<double> dft_frequency_grid(double sample_rate_hz, int dft_size);

struct HrtfSet {
  SphericalGrid grid;
  std::vector<double> frequencies_hz;  // F, strictly increasing
  ComplexMatrix left;                  // K x F
  ComplexMatrix right;                 // K x F
  double sample_rate_hz = 48000.0;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t num_directions() const { return grid.size(); }
  std::size_t num_frequencies() const { return frequencies_hz.size(); }
  void validate() const;
};

// Native little-endian container:
//   "BSMD" | u32 version=1 | u32 K | u32 F | f64 fs | f64 theta[K] |
//   f64 phi[K] | f64 weight[K] | f64 freq[F] | left (re,im)[K*F] |
//   right (re,im)[K*F] | u32 n | n bytes of UTF-8 JSON metadata
// Complex arrays are row-major over (direction, frequency). All-zero
// weights mean "absent": the loader substitutes 1/K and records a warning.
inline constexpr std::uint32_t kNativeVersion = 1;

std::vector<std::uint8_t> encode_native(const HrtfSet& set);
HrtfSet decode_native(std::span<const std::uint8_t> bytes);
void save_native(const HrtfSet& set, const std::filesystem::path& path);
HrtfSet load_native(const std::filesystem::path& path);

struct HorizontalSubset {
  std::vector<std::size_t> indices;  // sorted by phi ascending
  std::vector<Direction> directions;
};

// Grid directions with |theta - 90 deg| <= tolerance_deg.
HorizontalSubset horizontal_subset(const SphericalGrid& grid, double tolerance_deg);
HorizontalSubset horizontal_subset(const HrtfSet& set, double tolerance_deg);

// Index of the grid direction with the smallest great-circle distance to
// `query`; ties go to the lowest index.
std::size_t nearest_direction(const SphericalGrid& grid, const Direction& query);

// Restricts a set to the given direction indices (weights renormalized).
HrtfSet select_directions(const HrtfSet& set, std::span<const std::size_t> indices);

struct SyntheticHead {
  double radius_m = 0.0875;
  Direction left_ear = Direction::from_degrees(90.0, 100.0);
  Direction right_ear = Direction::from_degrees(90.0, -100.0);
};

// Rigid-sphere head surrogate: each ear's response is the rigid-sphere
// steering entry of a point on the sphere at the ear direction.
HrtfSet synthetic_sphere_hrtf(const SyntheticHead& head, const SphericalGrid& grid,
                              std::span<const double> frequencies_hz,
                              double sample_rate_hz = 48000.0);

}  // namespace bsm

#endif  // BSM_HRTF_H_
