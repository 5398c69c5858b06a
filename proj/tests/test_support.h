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

// Shared fixtures for the unit and acceptance tests.

#ifndef BSM_TESTS_TEST_SUPPORT_H_
#define BSM_TESTS_TEST_SUPPORT_H_

#include <cmath>
#include <random>
#include <vector>

#include "bsm/design.h"
#include "bsm/gammatone.h"
#include "bsm/hrtf.h"
#include "bsm/imagls.h"

namespace bsm::testing {

// Design problem on the six-microphone array with the rigid-sphere head,
// a Gauss product grid and a horizontal ring, at the given frequencies.
inline DesignProblem small_problem(const std::vector<double>& freqs, int n_theta = 6, int n_phi = 10,
                                   int ring = 12, double noise_to_signal = 1e-4) {
  const auto grid = gauss_product_grid(n_theta, n_phi);
  const SyntheticHead head;
  const auto hrtf = synthetic_sphere_hrtf(head, grid, freqs);
  const auto horizontal = synthetic_sphere_hrtf(head, horizontal_ring(ring), freqs);
  return make_design_problem(ArrayGeometry::semicircular6(), hrtf, noise_to_signal, &horizontal);
}

inline std::vector<double> linear_freqs(double lo, double hi, int count) {
  std::vector<double> f(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) f[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return f;
}

inline ImaglsConfig small_imagls_config(const DesignProblem& problem, double lambda, double lo = 1500.0,
                                        double hi = 20000.0) {
  ImaglsConfig cfg;
  cfg.lambda = lambda;
  cfg.ild_spec = make_ild_spec(lo, hi, 1.0, problem.horizontal.directions);
  return cfg;
}

inline FilterBank random_bank(const DesignProblem& problem, std::uint32_t seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  FilterBank bank;
  bank.frequencies_hz = problem.frequencies_hz;
  for (std::size_t f = 0; f < problem.num_bins(); ++f) {
    ComplexMatrix c(static_cast<Eigen::Index>(problem.num_mics()), 2);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = {normal(rng), normal(rng)};
    bank.coeffs.push_back(c);
  }
  return bank;
}

inline double relative_difference(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace bsm::testing

#endif  // BSM_TESTS_TEST_SUPPORT_H_
