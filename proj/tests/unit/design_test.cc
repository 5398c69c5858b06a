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

#include "bsm/design.h"

#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "bsm/error.h"
#include "bsm/render.h"
#include "test_support.h"

namespace bsm {
namespace {

using testing::linear_freqs;
using testing::relative_difference;
using testing::small_problem;

// Minimizes sum_k w_k |c^H v_k - h_k|^2 + r ||c||^2 by stacking the weighted
// rows v_k^H c = conj(h_k) over a ridge block and solving with Householder QR.
ComplexMatrix stacked_least_squares(const DesignProblem& p, std::size_t bin) {
  const auto& V = p.steering[bin];
  const auto& H = p.target[bin];
  const Eigen::Index M = V.rows(), K = V.cols();
  ComplexMatrix A = ComplexMatrix::Zero(K + M, M);
  ComplexMatrix b = ComplexMatrix::Zero(K + M, 2);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double s = std::sqrt(p.weights[static_cast<std::size_t>(k)]);
    A.row(k) = s * V.col(k).adjoint();
    b.row(k) = s * H.row(k).conjugate();
  }
  A.bottomRows(M) = std::sqrt(p.noise_to_signal) * ComplexMatrix::Identity(M, M);
  return A.householderQr().solve(b);
}

ComplexMatrix swap_mic_pairs(const ComplexMatrix& c) {
  ComplexMatrix out(c.rows(), c.cols());
  for (Eigen::Index m = 0; m < c.rows(); ++m) out.row(m ^ 1) = c.row(m);
  return out;
}

TEST(MseDesign, MatchesStackedLeastSquares) {
  const auto p = small_problem({500.0, 2000.0, 7000.0, 15000.0});
  const auto bank = mse_filters(p);
  ASSERT_EQ(bank.num_bins(), 4u);
  EXPECT_EQ(bank.kind, DesignKind::kMse);
  for (std::size_t f = 0; f < 4; ++f) {
    EXPECT_LT(relative_difference(bank.coeffs[f], stacked_least_squares(p, f)), 1e-8) << "bin " << f;
  }
}

TEST(MseDesign, SingularWithoutRegularization) {
  const auto grid = gauss_product_grid(1, 4);  // 4 directions, 6 microphones
  const auto hrtf = synthetic_sphere_hrtf(SyntheticHead{}, grid, std::vector<double>{3000.0});
  const auto p = make_design_problem(ArrayGeometry::semicircular6(), hrtf, 0.0);
  try {
    mse_filters(p);
    FAIL() << "expected a singular system";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularSystem);
  }
  const auto regularized = make_design_problem(ArrayGeometry::semicircular6(), hrtf, 1e-4);
  EXPECT_NO_THROW(mse_filters(regularized));
}

TEST(MseDesign, MirrorSymmetricArrayGivesMirroredFilters) {
  const auto p = small_problem({1000.0, 6000.0});
  const auto bank = mse_filters(p);
  for (const auto& c : bank.coeffs) {
    EXPECT_LT((swap_mic_pairs(c.col(0)) - c.col(1)).norm() / c.norm(), 1e-8);
  }
}

TEST(MaglsDesign, LossHistoryIsMonotone) {
  const auto p = small_problem(linear_freqs(1500.0, 12000.0, 5));
  MaglsOptions opt;
  opt.record_history = true;
  opt.max_iter = 300;
  std::vector<MaglsBinReport> reports;
  const auto bank = magls_filters(p, opt, &reports);
  ASSERT_EQ(reports.size(), 5u);
  EXPECT_EQ(bank.kind, DesignKind::kMagls);
  for (const auto& r : reports) {
    ASSERT_GE(r.history.size(), 2u);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
    EXPECT_DOUBLE_EQ(r.history.back(), r.final_loss);
  }
}

TEST(MaglsDesign, MagnitudeErrorNoWorseThanMse) {
  const auto p = small_problem(linear_freqs(1500.0, 18000.0, 6));
  MaglsOptions opt;
  opt.max_iter = 2000;
  const auto magls = magls_filters(p, opt);
  const auto mse = mse_filters(p);
  for (std::size_t f = 0; f < p.num_bins(); ++f) {
    for (int ear = 0; ear < 2; ++ear) {
      EXPECT_LE(magnitude_loss(p.steering[f], p.target[f], p.weights, magls.coeffs[f], ear),
                magnitude_loss(p.steering[f], p.target[f], p.weights, mse.coeffs[f], ear) + 1e-12)
          << "bin " << f << " ear " << ear;
    }
  }
}

TEST(MaglsDesign, OutOfBandBinsKeepMseSolution) {
  const auto p = small_problem({500.0, 3000.0});
  MaglsOptions opt;
  opt.band_lo_hz = 1500.0;
  const auto magls = magls_filters(p, opt);
  const auto mse = mse_filters(p);
  EXPECT_EQ(magls.coeffs[0], mse.coeffs[0]);
  EXPECT_GT((magls.coeffs[1] - mse.coeffs[1]).norm(), 1e-6);
}

TEST(MaglsDesign, MirrorSymmetric) {
  const auto p = small_problem({4000.0});
  const auto bank = magls_filters(p, MaglsOptions{});
  const auto& c = bank.coeffs[0];
  EXPECT_LT((swap_mic_pairs(c.col(0)) - c.col(1)).norm() / c.norm(), 1e-8);
}

double mean_adjacent_correlation(const FilterBank& bank) {
  double sum = 0.0;
  for (std::size_t f = 1; f < bank.num_bins(); ++f) {
    const auto& a = bank.coeffs[f - 1];
    const auto& b = bank.coeffs[f];
    sum += std::abs((a.adjoint() * b).trace()) / (a.norm() * b.norm());
  }
  return sum / static_cast<double>(bank.num_bins() - 1);
}

TEST(MaglsDesign, PhaseInitNamesRoundTrip) {
  for (auto init : {MaglsPhaseInit::kConstant, MaglsPhaseInit::kPreviousBin}) {
    EXPECT_EQ(parse_magls_phase_init(magls_phase_init_name(init)), init);
  }
  try {
    parse_magls_phase_init("random");
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(MaglsDesign, ContinuationWithoutPreviousBinUsesConstantPhase) {
  const auto p = small_problem({4000.0});
  MaglsOptions constant;
  MaglsOptions continued;
  continued.phase_init = MaglsPhaseInit::kPreviousBin;
  EXPECT_EQ(magls_filters(p, continued).coeffs[0], magls_filters(p, constant).coeffs[0]);
}

TEST(MaglsDesign, ContinuationKeepsMonotoneLossAndSmootherBank) {
  const auto p = small_problem(linear_freqs(1500.0, 6000.0, 40));
  MaglsOptions constant;
  constant.max_iter = 500;
  MaglsOptions continued = constant;
  continued.phase_init = MaglsPhaseInit::kPreviousBin;
  continued.record_history = true;
  std::vector<MaglsBinReport> reports;
  const auto smooth = magls_filters(p, continued, &reports);
  for (const auto& r : reports) {
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
  }
  const auto mse = mse_filters(p);
  for (std::size_t f = 0; f < p.num_bins(); ++f) {
    for (int ear = 0; ear < 2; ++ear) {
      EXPECT_LE(magnitude_loss(p.steering[f], p.target[f], p.weights, smooth.coeffs[f], ear),
                magnitude_loss(p.steering[f], p.target[f], p.weights, mse.coeffs[f], ear) + 1e-12);
    }
  }
  const auto rough = magls_filters(p, constant);
  EXPECT_GT(mean_adjacent_correlation(smooth), mean_adjacent_correlation(rough));
}

TEST(CovarianceConstraint, MatchesTargetCovariance) {
  const auto p = small_problem(linear_freqs(1500.0, 16000.0, 4));
  const auto constrained = apply_covariance_constraint(magls_filters(p, MaglsOptions{}), p);
  for (std::size_t f = 0; f < p.num_bins(); ++f) {
    const auto target = target_covariance(p.target[f], p.weights);
    const auto rendered = rendered_covariance(p.steering[f], p.weights, constrained.coeffs[f]);
    EXPECT_LT((rendered - target).norm() / target.norm(), 1e-10) << "bin " << f;
    EXPECT_TRUE(target.isApprox(target.adjoint()));
  }
}

TEST(CovarianceConstraint, LeavesOutOfBandBinsAlone) {
  const auto p = small_problem({500.0, 4000.0});
  const auto bank = mse_filters(p);
  const auto constrained = apply_covariance_constraint(bank, p, 1500.0, 20000.0);
  EXPECT_EQ(constrained.coeffs[0], bank.coeffs[0]);
}

TEST(DesignKindNames, RoundTrip) {
  for (auto kind : {DesignKind::kMse, DesignKind::kMagls, DesignKind::kImagls}) {
    EXPECT_EQ(parse_design_kind(design_kind_name(kind)), kind);
  }
  EXPECT_THROW(parse_design_kind("ls"), Error);
}

TEST(FilterBankContainer, RoundTrip) {
  const auto p = small_problem({1000.0, 5000.0});
  auto bank = mse_filters(p);
  bank.crossover_hz = 1500.0;
  bank.metadata["note"] = "x";
  const auto bytes = encode_filter_bank(bank);
  const auto back = decode_filter_bank(bytes);
  EXPECT_EQ(back.frequencies_hz, bank.frequencies_hz);
  EXPECT_EQ(back.coeffs, bank.coeffs);
  EXPECT_EQ(back.kind, bank.kind);
  EXPECT_DOUBLE_EQ(back.crossover_hz, 1500.0);
  EXPECT_EQ(back.metadata["note"], "x");
  EXPECT_EQ(encode_filter_bank(back), bytes);

  const auto path = std::filesystem::temp_directory_path() / "bsm_design_roundtrip.bsmf";
  save_filter_bank(bank, path);
  EXPECT_EQ(load_filter_bank(path).coeffs, bank.coeffs);
  std::filesystem::remove(path);
}

TEST(FilterBankContainer, RejectsCorruption) {
  const auto bytes = encode_filter_bank(mse_filters(small_problem({1000.0, 5000.0})));
  auto code_of = [](std::vector<std::uint8_t> b) {
    try {
      decode_filter_bank(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kDomain;
  };
  auto bad = bytes;
  bad[1] = 'Q';
  EXPECT_EQ(code_of(bad), ErrorCode::kBadMagic);
  bad = bytes;
  bad[4] = 2;
  EXPECT_EQ(code_of(bad), ErrorCode::kBadVersion);
  EXPECT_EQ(code_of(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3)), ErrorCode::kTruncated);
  bad = bytes;
  const double reversed = 9000.0;
  std::memcpy(bad.data() + 24, &reversed, 8);  // first frequency above the second
  EXPECT_EQ(code_of(bad), ErrorCode::kNonMonotoneFrequencies);
}

TEST(FilterBankContainer, FirFileIsNotABank) {
  FirSet fir;
  fir.sample_rate_hz = 48000.0;
  fir.taps[0] = RealMatrix::Zero(6, 128);
  fir.taps[1] = RealMatrix::Zero(6, 128);
  const auto path = std::filesystem::temp_directory_path() / "bsm_design_fir.bsmr";
  save_fir(fir, path);
  try {
    load_filter_bank(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadMagic);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bsm
