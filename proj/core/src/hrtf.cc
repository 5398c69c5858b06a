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

#include "bsm/hrtf.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "binary_io.h"
#include "bsm/array_model.h"
#include "bsm/error.h"

namespace bsm {
namespace internal {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace internal

namespace {

constexpr char kMagic[] = "BSMD";

bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }

}  // namespace

void SphericalGrid::validate() const {
  if (directions.empty()) throw Error(ErrorCode::kDimensionMismatch, "grid is empty");
  if (weights.size() != directions.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "grid weights and directions differ in length");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::kNonFinite, "non-finite grid weight");
    if (w < 0.0) throw Error(ErrorCode::kBadWeights, "negative grid weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorCode::kBadWeights, "grid weights sum to " + std::to_string(sum));
  }
  for (const auto& d : directions) {
    if (!std::isfinite(d.theta) || !std::isfinite(d.phi)) {
      throw Error(ErrorCode::kNonFinite, "non-finite grid direction");
    }
    if (!d.valid()) throw Error(ErrorCode::kDomain, "grid direction out of range");
  }
}

SphericalGrid gauss_product_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw Error(ErrorCode::kDomain, "grid sizes must be positive");
  // Gauss-Legendre nodes by Newton iteration on P_n.
  std::vector<double> nodes(n_theta), gl_weights(n_theta);
  for (int i = 0; i < n_theta; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n_theta + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int n = 1; n < n_theta; ++n) {
        const double p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n_theta * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    gl_weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  SphericalGrid grid;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = std::acos(std::clamp(nodes[i], -1.0, 1.0));
    for (int j = 0; j < n_phi; ++j) {
      grid.directions.push_back({theta, wrap_phi(-kPi + 2.0 * kPi * j / n_phi)});
      grid.weights.push_back(gl_weights[i] / (2.0 * n_phi));
    }
  }
  const double sum = std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0);
  for (double& w : grid.weights) w /= sum;
  return grid;
}

SphericalGrid fibonacci_grid(int count) {
  if (count < 1) throw Error(ErrorCode::kDomain, "grid size must be positive");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  SphericalGrid grid;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    grid.directions.push_back({std::acos(z), wrap_phi(golden * i)});
    grid.weights.push_back(1.0 / count);
  }
  return grid;
}

SphericalGrid horizontal_ring(int count) {
  if (count < 1) throw Error(ErrorCode::kDomain, "ring size must be positive");
  SphericalGrid grid;
  for (int l = 0; l < count; ++l) {
    grid.directions.push_back({kPi / 2, wrap_phi(-kPi + 2.0 * kPi * l / count)});
    grid.weights.push_back(1.0 / count);
  }
  return grid;
}

std::vector<double> dft_frequency_grid(double sample_rate_hz, int dft_size) {
  if (!(sample_rate_hz > 0.0) || dft_size < 2 || dft_size % 2 != 0) {
    throw Error(ErrorCode::kDomain, "bad DFT grid parameters");
  }
  std::vector<double> f(dft_size / 2 + 1);
  for (int k = 0; k <= dft_size / 2; ++k) f[k] = k * sample_rate_hz / dft_size;
  return f;
}

void HrtfSet::validate() const {
  grid.validate();
  const auto K = static_cast<Eigen::Index>(grid.size());
  const auto F = static_cast<Eigen::Index>(frequencies_hz.size());
  if (F == 0) throw Error(ErrorCode::kDimensionMismatch, "no frequencies");
  if (left.rows() != K || left.cols() != F || right.rows() != K || right.cols() != F) {
    throw Error(ErrorCode::kDimensionMismatch, "HRTF matrices do not match K x F");
  }
  for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
    if (!std::isfinite(frequencies_hz[i])) throw Error(ErrorCode::kNonFinite, "non-finite frequency");
    if (i > 0 && !(frequencies_hz[i] > frequencies_hz[i - 1])) {
      throw Error(ErrorCode::kNonMonotoneFrequencies, "frequencies not strictly increasing at index " +
                                                          std::to_string(i));
    }
  }
  if (!(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0)) {
    throw Error(ErrorCode::kNonFinite, "bad sample rate");
  }
  if (!all_finite(left) || !all_finite(right)) throw Error(ErrorCode::kNonFinite, "non-finite HRTF entry");
}

std::vector<std::uint8_t> encode_native(const HrtfSet& set) {
  set.validate();
  internal::ByteWriter w;
  w.magic(kMagic);
  w.u32(kNativeVersion);
  w.u32(static_cast<std::uint32_t>(set.num_directions()));
  w.u32(static_cast<std::uint32_t>(set.num_frequencies()));
  w.f64(set.sample_rate_hz);
  for (const auto& d : set.grid.directions) w.f64(d.theta);
  for (const auto& d : set.grid.directions) w.f64(d.phi);
  for (double v : set.grid.weights) w.f64(v);
  for (double f : set.frequencies_hz) w.f64(f);
  for (const ComplexMatrix* m : {&set.left, &set.right}) {
    for (Eigen::Index k = 0; k < m->rows(); ++k) {
      for (Eigen::Index f = 0; f < m->cols(); ++f) {
        w.f64((*m)(k, f).real());
        w.f64((*m)(k, f).imag());
      }
    }
  }
  w.text(set.metadata.dump());
  return w.take();
}

HrtfSet decode_native(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes);
  if (bytes.size() < 4) throw Error(ErrorCode::kTruncated, "file shorter than magic");
  if (!r.magic(kMagic)) throw Error(ErrorCode::kBadMagic, "not a BSMD container");
  const std::uint32_t version = r.u32();
  if (version != kNativeVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported BSMD version " + std::to_string(version));
  }
  const std::uint32_t K = r.u32();
  const std::uint32_t F = r.u32();
  if (K == 0 || F == 0) throw Error(ErrorCode::kDimensionMismatch, "K and F must be positive");
  // Size check before allocating anything proportional to K and F.
  const std::uint64_t payload = 8ULL + 8ULL * (3ULL * K + F) + 2ULL * 16ULL * K * F + 4ULL;
  if (r.remaining() < payload) {
    throw Error(ErrorCode::kTruncated, "payload shorter than declared K=" + std::to_string(K) +
                                           ", F=" + std::to_string(F));
  }
  HrtfSet set;
  set.sample_rate_hz = r.f64();
  set.grid.directions.resize(K);
  set.grid.weights.resize(K);
  for (auto& d : set.grid.directions) d.theta = r.f64();
  for (auto& d : set.grid.directions) d.phi = r.f64();
  for (auto& w : set.grid.weights) w = r.f64();
  set.frequencies_hz.resize(F);
  for (auto& f : set.frequencies_hz) f = r.f64();
  for (ComplexMatrix* m : {&set.left, &set.right}) {
    m->resize(K, F);
    for (Eigen::Index k = 0; k < K; ++k) {
      for (Eigen::Index f = 0; f < F; ++f) {
        const double re = r.f64();
        const double im = r.f64();
        (*m)(k, f) = {re, im};
      }
    }
  }
  const std::string meta = r.text();
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(r.remaining()) + " trailing bytes beyond declared dimensions");
  }
  try {
    set.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!set.metadata.is_object()) throw Error(ErrorCode::kUnsupportedFormat, "metadata must be a JSON object");
  if (std::all_of(set.grid.weights.begin(), set.grid.weights.end(), [](double w) { return w == 0.0; })) {
    std::fill(set.grid.weights.begin(), set.grid.weights.end(), 1.0 / K);
    set.metadata["warnings"].push_back("no quadrature weights in file; using uniform 1/K");
  }
  set.validate();
  return set;
}

void save_native(const HrtfSet& set, const std::filesystem::path& path) {
  internal::write_file(path, encode_native(set));
}

HrtfSet load_native(const std::filesystem::path& path) {
  return decode_native(internal::read_file(path));
}

HorizontalSubset horizontal_subset(const SphericalGrid& grid, double tolerance_deg) {
  if (!(tolerance_deg >= 0.0)) throw Error(ErrorCode::kDomain, "tolerance must be >= 0");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    // Small slack absorbs the degree/radian round trip of exactly-equatorial points.
    if (std::abs(rad_to_deg(grid.directions[k].theta) - 90.0) <= tolerance_deg + 1e-9) idx.push_back(k);
  }
  if (idx.empty()) {
    throw Error(ErrorCode::kNoHorizontalDirections,
                "no grid direction within " + std::to_string(tolerance_deg) + " deg of the horizontal plane");
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return grid.directions[a].phi < grid.directions[b].phi;
  });
  HorizontalSubset out;
  out.indices = idx;
  for (auto k : idx) out.directions.push_back(grid.directions[k]);
  return out;
}

HorizontalSubset horizontal_subset(const HrtfSet& set, double tolerance_deg) {
  return horizontal_subset(set.grid, tolerance_deg);
}

std::size_t nearest_direction(const SphericalGrid& grid, const Direction& query) {
  if (grid.size() == 0) throw Error(ErrorCode::kDimensionMismatch, "empty grid");
  std::size_t best = 0;
  double best_cos = -2.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double c = cos_angle_between(grid.directions[k], query);
    if (c > best_cos) {
      best_cos = c;
      best = k;
    }
  }
  return best;
}

HrtfSet select_directions(const HrtfSet& set, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::kDimensionMismatch, "empty direction selection");
  HrtfSet out;
  out.frequencies_hz = set.frequencies_hz;
  out.sample_rate_hz = set.sample_rate_hz;
  out.metadata = set.metadata;
  const auto K = static_cast<Eigen::Index>(indices.size());
  const auto F = static_cast<Eigen::Index>(set.num_frequencies());
  out.left.resize(K, F);
  out.right.resize(K, F);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < K; ++i) {
    const auto k = indices[i];
    if (k >= set.num_directions()) throw Error(ErrorCode::kDimensionMismatch, "direction index out of range");
    out.grid.directions.push_back(set.grid.directions[k]);
    out.grid.weights.push_back(set.grid.weights[k]);
    sum += set.grid.weights[k];
    out.left.row(i) = set.left.row(k);
    out.right.row(i) = set.right.row(k);
  }
  for (double& w : out.grid.weights) w = sum > 0.0 ? w / sum : 1.0 / K;
  return out;
}

HrtfSet synthetic_sphere_hrtf(const SyntheticHead& head, const SphericalGrid& grid,
                              std::span<const double> frequencies_hz, double sample_rate_hz) {
  grid.validate();
  ArrayGeometry ears;
  ears.radius_m = head.radius_m;
  ears.baffle = Baffle::kRigidSphere;
  ears.mic_directions = {head.left_ear, head.right_ear};
  ears.validate();
  HrtfSet set;
  set.grid = grid;
  set.frequencies_hz.assign(frequencies_hz.begin(), frequencies_hz.end());
  set.sample_rate_hz = sample_rate_hz;
  const auto K = static_cast<Eigen::Index>(grid.size());
  const auto F = static_cast<Eigen::Index>(frequencies_hz.size());
  set.left.resize(K, F);
  set.right.resize(K, F);
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto v = steering_matrix(ears, frequencies_hz[f], grid.directions);
    set.left.col(f) = v.entries.row(0).transpose();
    set.right.col(f) = v.entries.row(1).transpose();
  }
  set.metadata = {
      {"source", "synthetic_rigid_sphere"},
      {"head_radius_m", head.radius_m},
      {"left_ear_deg", {rad_to_deg(head.left_ear.theta), rad_to_deg(head.left_ear.phi)}},
      {"right_ear_deg", {rad_to_deg(head.right_ear.theta), rad_to_deg(head.right_ear.phi)}},
  };
  set.validate();
  return set;
}

}  // namespace bsm
