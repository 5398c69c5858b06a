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

#include "bsm/imagls.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bsm/error.h"
#include "test_support.h"

namespace bsm {
namespace {

using testing::linear_freqs;
using testing::random_bank;
using testing::small_imagls_config;
using testing::small_problem;

// Horizontal-plane targets rearranged as L x F spectra per ear.
std::pair<ComplexMatrix, ComplexMatrix> horizontal_spectra(const DesignProblem& p) {
  const auto L = static_cast<Eigen::Index>(p.horizontal.directions.size());
  const auto F = static_cast<Eigen::Index>(p.num_bins());
  ComplexMatrix left(L, F), right(L, F);
  for (Eigen::Index f = 0; f < F; ++f) {
    left.col(f) = p.horizontal.target[static_cast<std::size_t>(f)].col(0);
    right.col(f) = p.horizontal.target[static_cast<std::size_t>(f)].col(1);
  }
  return {left, right};
}

TEST(SmoothAbs, ApproachesAbsoluteValue) {
  EXPECT_NEAR(smooth_abs(-3.0, 1e-12), 3.0, 1e-12);
  EXPECT_NEAR(smooth_abs(Complex(3.0, 4.0), 1e-12), 5.0, 1e-12);
  EXPECT_NEAR(smooth_abs(0.0, 1e-6), 1e-3, 1e-15);
}

TEST(Trapezoid, WeightsIntegrateLinearFunctionsExactly) {
  const std::vector<double> nodes = {0.0, 0.5, 2.0, 2.25, 4.0};
  const auto tau = trapezoid_weights(nodes);
  double integral_one = 0.0, integral_x = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    integral_one += tau[i];
    integral_x += tau[i] * nodes[i];
  }
  EXPECT_NEAR(integral_one, 4.0, 1e-15);
  EXPECT_NEAR(integral_x, 8.0, 1e-14);
  EXPECT_EQ(trapezoid_weights(std::vector<double>{7.0}), std::vector<double>{1.0});
}

TEST(MagnitudeWeights, SumToOneAndFavourLowFrequencies) {
  const auto f = linear_freqs(1500.0, 19500.0, 10);
  const auto uniform = magnitude_bin_weights(f, MagnitudeWeighting::kUniform);
  for (double w : uniform) EXPECT_DOUBLE_EQ(w, 0.1);
  const auto erb = magnitude_bin_weights(f, MagnitudeWeighting::kErbRate);
  double total = 0.0;
  for (double w : erb) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
  for (std::size_t i = 2; i + 1 < f.size(); ++i) EXPECT_LT(erb[i], erb[i - 1]);
  EXPECT_EQ(parse_magnitude_weighting(magnitude_weighting_name(MagnitudeWeighting::kErbRate)),
            MagnitudeWeighting::kErbRate);
  EXPECT_THROW(parse_magnitude_weighting("bark"), Error);
  EXPECT_EQ(parse_imagls_init(imagls_init_name(ImaglsInit::kZeros)), ImaglsInit::kZeros);
}

TEST(IldCurve, SignAndFrontalSymmetry) {
  const auto p = small_problem(linear_freqs(1500.0, 19500.0, 40), 6, 10, 12);
  const auto [left, right] = horizontal_spectra(p);
  const auto spec = make_ild_spec(1500.0, 20000.0, 1.0, p.horizontal.directions);
  const auto ild = ild_curve(left, right, spec, p.frequencies_hz);
  ASSERT_EQ(ild.rows(), 12);
  ASSERT_EQ(ild.cols(), static_cast<Eigen::Index>(spec.centers_hz.size()));
  // Ring index 6 is phi = 0 (front), 9 is +90 (left), 3 is -90 (right), 0 is rear.
  for (Eigen::Index c = 0; c < ild.cols(); ++c) {
    EXPECT_NEAR(ild(6, c), 0.0, 1e-9);
    EXPECT_NEAR(ild(0, c), 0.0, 1e-9);
    EXPECT_GT(ild(9, c), 0.0);
    EXPECT_NEAR(ild(3, c), -ild(9, c), 1e-9);
  }
}

TEST(IldCurve, MatchesDirectSumForFlatSpectra) {
  // Constant power ratio 4 across the band gives 10 log10(4) at every centre.
  const auto freqs = linear_freqs(1000.0, 9000.0, 30);
  ComplexMatrix left = ComplexMatrix::Constant(2, 30, Complex(2.0, 0.0));
  ComplexMatrix right = ComplexMatrix::Constant(2, 30, Complex(0.0, 1.0));
  const auto spec = make_ild_spec(1500.0, 8000.0, 1.0, {Direction{}, Direction::from_degrees(90, 40)});
  const auto ild = ild_curve(left, right, spec, freqs);
  for (Eigen::Index i = 0; i < ild.size(); ++i) EXPECT_NEAR(ild(i), 10.0 * std::log10(4.0), 1e-12);
}

TEST(IldCurve, ZeroPowerIsDegenerate) {
  const auto freqs = linear_freqs(1000.0, 9000.0, 30);
  ComplexMatrix left = ComplexMatrix::Constant(1, 30, Complex(1.0, 0.0));
  ComplexMatrix right = ComplexMatrix::Zero(1, 30);
  const auto spec = make_ild_spec(1500.0, 8000.0, 1.0, {Direction{}});
  try {
    ild_curve(left, right, spec, freqs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneratePower);
  }
  EXPECT_NO_THROW(ild_curve(left, right, spec, freqs, 1e-12));
}

TEST(ImaglsObjectiveTest, PackUnpackRoundTrip) {
  const auto p = small_problem(linear_freqs(500.0, 12000.0, 8));
  const auto cfg = small_imagls_config(p, 0.1);
  const ImaglsObjective objective(p, cfg);
  const auto bank = random_bank(p, 3);
  EXPECT_EQ(objective.num_params(), 4 * objective.band_bins().size() * p.num_mics());
  const auto x = objective.pack(bank);
  FilterBank back = bank;
  for (auto& c : back.coeffs) c.setZero();
  objective.unpack(x, back);
  for (std::size_t b : objective.band_bins()) EXPECT_EQ(back.coeffs[b], bank.coeffs[b]);
  EXPECT_TRUE(back.coeffs[0].isZero());  // 500 Hz lies outside the band
}

TEST(ImaglsObjectiveTest, GradientMatchesCentralDifferences) {
  const auto p = small_problem(linear_freqs(1500.0, 16000.0, 10));
  for (double lambda : {0.0, 0.1, 1.0}) {
    auto cfg = small_imagls_config(p, lambda);
    cfg.magnitude_weighting = lambda > 0.5 ? MagnitudeWeighting::kErbRate : MagnitudeWeighting::kUniform;
    const ImaglsObjective objective(p, cfg);
    const RealVector x = objective.pack(random_bank(p, 11, 0.3));
    RealVector grad(x.size());
    objective.evaluate(x, &grad);
    for (Eigen::Index i = 0; i < x.size(); i += 7) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      RealVector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (objective.evaluate(xp, nullptr).total - objective.evaluate(xm, nullptr).total) / (2 * h);
      EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "lambda " << lambda << " coord " << i;
    }
  }
}

TEST(ImaglsObjectiveTest, BankGradientAgreesWithObjective) {
  const auto p = small_problem(linear_freqs(1500.0, 16000.0, 6));
  const auto cfg = small_imagls_config(p, 0.2);
  const auto bank = random_bank(p, 5);
  const ImaglsObjective objective(p, cfg);
  RealVector grad(static_cast<Eigen::Index>(objective.num_params()));
  const auto lb = objective.evaluate(objective.pack(bank), &grad);
  EXPECT_DOUBLE_EQ(imagls_loss(bank, p, cfg).total, lb.total);
  EXPECT_NEAR(lb.total, 0.5 * (lb.mag_left + lb.mag_right) + 0.2 * lb.ild_term, 1e-12);
  const auto gbank = imagls_gradient(bank, p, cfg);
  const auto b0 = objective.band_bins().front();
  EXPECT_DOUBLE_EQ(gbank.coeffs[b0](0, 0).real(), grad[0]);
  EXPECT_DOUBLE_EQ(gbank.coeffs[b0](0, 0).imag(), grad[1]);
}

TEST(ImaglsObjectiveTest, ExactTargetsGiveZeroIldTerm) {
  const auto p = small_problem(linear_freqs(1500.0, 16000.0, 6));
  const auto cfg = small_imagls_config(p, 1.0);
  const ImaglsObjective objective(p, cfg);
  // The target ILD is finite and antisymmetric across the ring.
  const auto& t = objective.target_ild();
  EXPECT_TRUE(t.allFinite());
  EXPECT_NEAR((t.row(3) + t.row(9)).norm(), 0.0, 1e-9);
}

TEST(OptimizeImagls, ReducesLossFromMaglsStartAndIsDeterministic) {
  const auto p = small_problem(linear_freqs(1000.0, 18000.0, 14));
  auto cfg = small_imagls_config(p, 0.1);
  cfg.max_iter = 60;
  LossBreakdown a, b;
  const auto bank_a = optimize_imagls(p, cfg, &a);
  const auto bank_b = optimize_imagls(p, cfg, &b);
  ASSERT_GE(a.history.size(), 2u);
  EXPECT_LT(a.total, a.history.front().total);
  EXPECT_LT(a.ild_term, a.history.front().ild);
  for (std::size_t f = 0; f < p.num_bins(); ++f) EXPECT_EQ(bank_a.coeffs[f], bank_b.coeffs[f]);
  EXPECT_EQ(bank_a.kind, DesignKind::kImagls);
  // 1000 Hz lies below the band and keeps the MSE solution.
  EXPECT_EQ(bank_a.coeffs[0], mse_filters(p).coeffs[0]);

  const auto path = std::filesystem::temp_directory_path() / "bsm_imagls_history.csv";
  write_history_csv(a.history, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "iter,total,mag_l,mag_r,ild,grad_norm,step");
  std::filesystem::remove(path);
}

TEST(ImaglsConfigTest, RejectsInvalidValues) {
  ImaglsConfig cfg;
  cfg.ild_spec = make_ild_spec(1500.0, 20000.0, 1.0, {Direction{}});
  EXPECT_NO_THROW(cfg.validate());
  cfg.lambda = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.lambda = 0.1;
  cfg.smoothing_eps = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace bsm
