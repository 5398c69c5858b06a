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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "bsm/error.h"

namespace bsm {
namespace {

ErrorCode decode_error(std::span<const std::uint8_t> bytes) {
  try {
    decode_native(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::kDomain;
}

HrtfSet tiny_set() {
  const auto grid = gauss_product_grid(3, 4);
  return synthetic_sphere_hrtf(SyntheticHead{}, grid, std::vector<double>{0.0, 1000.0, 4000.0});
}

void put_u32(std::vector<std::uint8_t>& bytes, std::size_t offset, std::uint32_t v) {
  std::memcpy(bytes.data() + offset, &v, 4);
}
void put_f64(std::vector<std::uint8_t>& bytes, std::size_t offset, double v) {
  std::memcpy(bytes.data() + offset, &v, 8);
}

TEST(Grid, GaussProductIntegratesPolynomialsExactly) {
  const auto grid = gauss_product_grid(6, 13);
  double total = 0.0, z2 = 0.0, z4 = 0.0, xy = 0.0, x2 = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& d = grid.directions[k];
    const double w = grid.weights[k];
    const double x = std::sin(d.theta) * std::cos(d.phi), y = std::sin(d.theta) * std::sin(d.phi);
    const double z = std::cos(d.theta);
    total += w;
    z2 += w * z * z;
    z4 += w * std::pow(z, 4);
    xy += w * x * y;
    x2 += w * x * x;
  }
  // Averages over the unit sphere: <z^2> = 1/3, <z^4> = 1/5, <xy> = 0.
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(z2, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(z4, 1.0 / 5.0, 1e-14);
  EXPECT_NEAR(xy, 0.0, 1e-14);
  EXPECT_NEAR(x2, 1.0 / 3.0, 1e-14);
  EXPECT_EQ(grid.size(), 78u);
}

TEST(Grid, FibonacciAndRingAreValid) {
  const auto fib = fibonacci_grid(101);
  EXPECT_EQ(fib.size(), 101u);
  EXPECT_NO_THROW(fib.validate());
  const auto ring = horizontal_ring(8);
  ASSERT_EQ(ring.size(), 8u);
  EXPECT_NEAR(ring.directions[0].phi, -kPi, 1e-15);
  EXPECT_NEAR(ring.directions[4].phi, 0.0, 1e-15);
  for (const auto& d : ring.directions) EXPECT_DOUBLE_EQ(d.theta, kPi / 2);
  EXPECT_THROW(horizontal_ring(0), Error);
  EXPECT_THROW(gauss_product_grid(0, 3), Error);
}

TEST(Grid, ValidationCatchesBadWeights) {
  auto grid = fibonacci_grid(4);
  grid.weights[0] = -0.1;
  EXPECT_THROW(grid.validate(), Error);
  grid = fibonacci_grid(4);
  grid.weights[0] = 3.0;
  try {
    grid.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadWeights);
  }
}

TEST(Grid, DftFrequencyGrid) {
  const auto f = dft_frequency_grid(48000.0, 2048);
  ASSERT_EQ(f.size(), 1025u);
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[64], 1500.0);
  EXPECT_DOUBLE_EQ(f.back(), 24000.0);
  EXPECT_THROW(dft_frequency_grid(48000.0, 7), Error);
}

TEST(NativeContainer, RoundTripIsLossless) {
  auto set = tiny_set();
  set.metadata["subject"] = "sphere";
  const auto bytes = encode_native(set);
  const auto back = decode_native(bytes);
  EXPECT_EQ(back.grid.directions, set.grid.directions);
  EXPECT_EQ(back.grid.weights, set.grid.weights);
  EXPECT_EQ(back.frequencies_hz, set.frequencies_hz);
  EXPECT_EQ(back.left, set.left);
  EXPECT_EQ(back.right, set.right);
  EXPECT_EQ(back.metadata["subject"], "sphere");
  EXPECT_EQ(encode_native(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "bsm_hrtf_roundtrip.bsmd";
  save_native(set, path);
  EXPECT_EQ(load_native(path).right, set.right);
  std::filesystem::remove(path);
}

TEST(NativeContainer, RejectsCorruptHeaders) {
  const auto good = encode_native(tiny_set());
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(decode_error(bad), ErrorCode::kBadMagic);
  bad = good;
  put_u32(bad, 4, 7);
  EXPECT_EQ(decode_error(bad), ErrorCode::kBadVersion);
  bad = good;
  put_u32(bad, 8, 0);
  EXPECT_EQ(decode_error(bad), ErrorCode::kDimensionMismatch);
  bad = good;
  put_u32(bad, 8, 1000);  // declares more directions than stored
  EXPECT_EQ(decode_error(bad), ErrorCode::kTruncated);
  bad = good;
  bad.push_back(0);
  EXPECT_EQ(decode_error(bad), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(decode_error(std::span<const std::uint8_t>(good.data(), good.size() - 5)), ErrorCode::kTruncated);
  EXPECT_EQ(decode_error(std::span<const std::uint8_t>(good.data(), 2)), ErrorCode::kTruncated);
}

TEST(NativeContainer, RejectsBadContent) {
  const auto set = tiny_set();
  const std::size_t K = set.num_directions();
  const std::size_t header = 4 + 4 + 4 + 4 + 8;
  const std::size_t freq_offset = header + 3 * 8 * K;
  auto bad = encode_native(set);
  put_f64(bad, freq_offset + 8, 5000.0);  // 0, 5000, 4000
  EXPECT_EQ(decode_error(bad), ErrorCode::kNonMonotoneFrequencies);
  bad = encode_native(set);
  put_f64(bad, freq_offset + 3 * 8, std::nan(""));  // first left entry
  EXPECT_EQ(decode_error(bad), ErrorCode::kNonFinite);
  bad = encode_native(set);
  put_f64(bad, header + 2 * 8 * K, -1.0);  // first weight
  EXPECT_EQ(decode_error(bad), ErrorCode::kBadWeights);
}

TEST(NativeContainer, MissingWeightsBecomeUniformWithWarning) {
  const auto set = tiny_set();
  const std::size_t K = set.num_directions();
  auto bytes = encode_native(set);
  for (std::size_t k = 0; k < K; ++k) put_f64(bytes, 24 + 2 * 8 * K + 8 * k, 0.0);
  const auto back = decode_native(bytes);
  for (double w : back.grid.weights) EXPECT_DOUBLE_EQ(w, 1.0 / K);
  ASSERT_TRUE(back.metadata.contains("warnings"));
  EXPECT_EQ(back.metadata["warnings"].size(), 1u);
}

TEST(Horizontal, SubsetSelectsPlaneSortedByAzimuth) {
  auto grid = horizontal_ring(6);
  grid.directions.push_back(Direction::from_degrees(60.0, 10.0));
  grid.directions.push_back(Direction::from_degrees(90.3, 10.0));
  grid.weights.assign(grid.directions.size(), 1.0 / grid.directions.size());
  const auto strict = horizontal_subset(grid, 0.1);
  EXPECT_EQ(strict.indices.size(), 6u);
  const auto loose = horizontal_subset(grid, 0.5);
  EXPECT_EQ(loose.indices.size(), 7u);
  for (std::size_t i = 1; i < loose.directions.size(); ++i) {
    EXPECT_LE(loose.directions[i - 1].phi, loose.directions[i].phi);
  }
  try {
    horizontal_subset(gauss_product_grid(2, 4), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoHorizontalDirections);
  }
}

TEST(Horizontal, NearestDirectionAndSelection) {
  const auto ring = horizontal_ring(8);
  EXPECT_EQ(nearest_direction(ring, Direction::from_degrees(85.0, 2.0)), 4u);
  const auto set = synthetic_sphere_hrtf(SyntheticHead{}, ring, std::vector<double>{500.0, 2000.0});
  const std::vector<std::size_t> pick = {1, 4};
  const auto sub = select_directions(set, pick);
  ASSERT_EQ(sub.num_directions(), 2u);
  EXPECT_DOUBLE_EQ(sub.grid.weights[0], 0.5);
  EXPECT_EQ(sub.left.row(1), set.left.row(4));
  const std::vector<std::size_t> out_of_range = {9};
  EXPECT_THROW(select_directions(set, out_of_range), Error);
}

TEST(SyntheticHead, EarsAreMirrorImages) {
  const auto ring = horizontal_ring(36);
  const auto set = synthetic_sphere_hrtf(SyntheticHead{}, ring, std::vector<double>{300.0, 3000.0, 12000.0});
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const auto mirrored = nearest_direction(ring, mirror_sagittal(ring.directions[k]));
    for (Eigen::Index f = 0; f < 3; ++f) {
      EXPECT_NEAR(std::abs(set.left(k, f) - set.right(mirrored, f)), 0.0, 1e-12);
    }
  }
}

TEST(SyntheticHead, SourceSideEarIsLouder) {
  const auto set = synthetic_sphere_hrtf(SyntheticHead{}, horizontal_ring(4), std::vector<double>{6000.0});
  // Ring index 3 is phi = +90 (left), index 1 is phi = -90 (right).
  EXPECT_GT(std::abs(set.left(3, 0)), 2.0 * std::abs(set.right(3, 0)));
  EXPECT_GT(std::abs(set.right(1, 0)), 2.0 * std::abs(set.left(1, 0)));
  EXPECT_EQ(set.metadata["source"], "synthetic_rigid_sphere");
}

}  // namespace
}  // namespace bsm
