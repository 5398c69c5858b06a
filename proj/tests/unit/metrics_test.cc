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

#include "bsm/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "bsm/error.h"
#include "test_support.h"

namespace bsm {
namespace {

using testing::linear_freqs;
using testing::random_bank;
using testing::small_problem;

std::string first_line(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

TEST(ErrorCurves, ExactReproductionHitsFloor) {
  const auto p = small_problem({2000.0, 6000.0});
  const auto nmse = nmse_db(p.target, p.target, p.weights);
  const auto mag = magnitude_error_db(p.target, p.target, p.weights);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_EQ(nmse(i), kDbFloor);
    EXPECT_EQ(mag(i), kDbFloor);
  }
  EXPECT_EQ(to_db_floored(0.0), kDbFloor);
  EXPECT_NEAR(to_db_floored(0.1), -10.0, 1e-12);
}

TEST(ErrorCurves, SilentEstimateIsZeroDb) {
  const auto p = small_problem({2000.0, 6000.0});
  std::vector<ComplexMatrix> zeros;
  for (const auto& t : p.target) zeros.push_back(ComplexMatrix::Zero(t.rows(), t.cols()));
  const auto nmse = nmse_db(zeros, p.target, p.weights);
  const auto mag = magnitude_error_db(zeros, p.target, p.weights);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(nmse(i), 0.0, 1e-12);
    EXPECT_NEAR(mag(i), 0.0, 1e-12);
  }
}

TEST(ErrorCurves, MagnitudeErrorNeverExceedsComplexError) {
  const auto p = small_problem(linear_freqs(1500.0, 15000.0, 6));
  const auto bank = random_bank(p, 21, 0.2);
  const auto z = estimated_binaural(bank, p.steering);
  const auto nmse = nmse_db(z, p.target, p.weights);
  const auto mag = magnitude_error_db(z, p.target, p.weights);
  for (Eigen::Index i = 0; i < nmse.size(); ++i) EXPECT_LE(mag(i), nmse(i) + 1e-12);
}

TEST(ErrorCurves, EstimateIsFilterInnerProduct) {
  const auto p = small_problem({3000.0});
  const auto bank = random_bank(p, 4);
  const auto z = estimated_binaural(bank, p.steering);
  ASSERT_EQ(z[0].rows(), static_cast<Eigen::Index>(p.num_directions()));
  const Complex direct = bank.coeffs[0].col(1).dot(p.steering[0].col(5));  // conjugates the first operand
  EXPECT_NEAR(std::abs(z[0](5, 1) - direct), 0.0, 1e-12);
}

TEST(Report, CurvesAreConsistent) {
  const auto p = small_problem(linear_freqs(0.0, 20000.0, 41), 6, 10, 8);
  const auto spec = make_ild_spec(1500.0, 20000.0, 1.0, p.horizontal.directions);
  const auto mse = mse_filters(p);
  const auto noisy = random_bank(p, 8, 0.5);
  const std::vector<NamedBank> banks = {{"mse", &mse}, {"noisy", &noisy}};
  const auto report = ild_error_report(p, banks, spec);
  ASSERT_EQ(report.methods.size(), 2u);
  for (double f : report.frequencies_hz) {
    EXPECT_GE(f, 1500.0);
    EXPECT_LT(f, 20000.0);
  }
  const auto& m = report.method("mse");
  EXPECT_EQ(m.nmse_db.size(), static_cast<Eigen::Index>(report.frequencies_hz.size()));
  EXPECT_LT((m.ild_abs_error_db - (m.ild_db - report.target_ild_db).cwiseAbs()).norm(), 1e-12);
  EXPECT_LT((m.ild_error_vs_freq - m.ild_abs_error_db.colwise().mean().transpose()).norm(), 1e-12);
  EXPECT_LT((m.ild_error_vs_angle - m.ild_abs_error_db.rowwise().mean()).norm(), 1e-12);
  EXPECT_NEAR(mean_ild_error_db(m), m.ild_abs_error_db.mean(), 1e-12);
  EXPECT_LT(mean_ild_error_db(m), mean_ild_error_db(report.method("noisy")));
  EXPECT_THROW(report.method("absent"), Error);

  const auto rows = report.half_plane_rows();
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_DOUBLE_EQ(rows.front().first, 0.0);
  EXPECT_DOUBLE_EQ(rows.back().first, 180.0);
  EXPECT_EQ(rows.back().second, 0u);  // phi = -180 is reported as 180

  const auto dir = std::filesystem::temp_directory_path() / "bsm_metrics_csv";
  std::filesystem::remove_all(dir);
  write_report_csvs(report, dir);
  EXPECT_EQ(first_line(dir / "nmse.csv"), "freq_hz,nmse_db_mse,nmse_db_noisy");
  EXPECT_EQ(first_line(dir / "magnitude.csv"), "freq_hz,mag_err_db_mse,mag_err_db_noisy");
  EXPECT_EQ(first_line(dir / "ild_vs_freq.csv"), "f0_hz,ild_err_db_mse,ild_err_db_noisy");
  EXPECT_EQ(first_line(dir / "ild_vs_angle.csv"),
            "phi_deg,ild_db_target,ild_db_mse,ild_db_noisy,ild_err_db_mse,ild_err_db_noisy");
  std::filesystem::remove_all(dir);
}

TEST(Report, SummaryHelpers) {
  RealVector curve(4);
  curve << -10, -20, -30, -40;
  const std::vector<double> f = {1000, 2000, 3000, 6000};
  EXPECT_DOUBLE_EQ(mean_in_band(curve, f, 1500, 5000), -25.0);
  EXPECT_DOUBLE_EQ(mean_in_band(curve, f, 1000, 3000), -20.0);  // closed interval
}

TEST(Report, MismatchedBankIsRejected) {
  const auto p = small_problem({2000.0, 6000.0});
  const auto other = mse_filters(small_problem({2000.0, 7000.0}));
  const std::vector<NamedBank> banks = {{"bad", &other}};
  try {
    ild_error_report(p, banks, make_ild_spec(1500.0, 20000.0, 1.0, p.horizontal.directions));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridMismatch);
  }
}

}  // namespace
}  // namespace bsm
