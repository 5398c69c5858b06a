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

// Independent reference implementations used as test oracles.

#ifndef BSM_TESTS_ORACLES_H_
#define BSM_TESTS_ORACLES_H_

#include <cmath>
#include <complex>
#include <span>

#include "bsm/array_model.h"
#include "bsm/types.h"

namespace bsm::testing {

// Rigid-sphere / open-sphere mode strength from libstdc++'s spherical Bessel
// functions, with derivatives from the standard recurrence. Orders whose
// Neumann function overflows contribute nothing measurable and return 0.
inline Complex oracle_bn(int n, double ka, Baffle baffle) {
  const auto un = static_cast<unsigned>(n);
  const Complex phase = std::pow(Complex(0.0, -1.0), n);
  const double j = std::sph_bessel(un, ka);
  if (baffle == Baffle::kOpen) return 4.0 * kPi * phase * j;
  const double y = std::sph_neumann(un, ka);
  if (!std::isfinite(y) || std::abs(y) > 1e280) return 0.0;
  const double jd = n == 0 ? -std::sph_bessel(1, ka) : std::sph_bessel(un - 1, ka) - (n + 1) / ka * j;
  const double yd = n == 0 ? -std::sph_neumann(1, ka) : std::sph_neumann(un - 1, ka) - (n + 1) / ka * y;
  const Complex h(j, y), hd(jd, yd);
  return 4.0 * kPi * phase * (j - jd / hd * h);
}

// Complex spherical harmonic Y_n^m with the Condon-Shortley phase.
inline Complex oracle_ynm(int n, int m, const Direction& d) {
  const int am = std::abs(m);
  const Complex positive =
      std::sph_legendre(static_cast<unsigned>(n), static_cast<unsigned>(am), d.theta) * std::polar(1.0, am * d.phi);
  if (m >= 0) return positive;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(positive);
}

// Plane-wave steering by the spherical-harmonic double sum
//   v = sum_n b_n sum_m Y_n^m(mic) conj(Y_n^m(source)).
inline ComplexMatrix oracle_steering(const ArrayGeometry& geometry, double frequency_hz,
                                     std::span<const Direction> grid, int order) {
  const double ka = wavenumber(frequency_hz) * geometry.radius_m;
  const auto M = static_cast<Eigen::Index>(geometry.mic_directions.size());
  const auto K = static_cast<Eigen::Index>(grid.size());
  ComplexMatrix v = ComplexMatrix::Zero(M, K);
  for (int n = 0; n <= order; ++n) {
    const Complex b = ka == 0.0 ? (n == 0 ? Complex(4.0 * kPi) : Complex(0.0)) : oracle_bn(n, ka, geometry.baffle);
    if (b == 0.0) continue;
    for (int m = -n; m <= n; ++m) {
      ComplexVector mic(M);
      for (Eigen::Index i = 0; i < M; ++i) mic(i) = oracle_ynm(n, m, geometry.mic_directions[i]);
      for (Eigen::Index k = 0; k < K; ++k) {
        const Complex src = std::conj(oracle_ynm(n, m, grid[k]));
        v.col(k) += b * src * mic;
      }
    }
  }
  return v;
}

}  // namespace bsm::testing

#endif  // BSM_TESTS_ORACLES_H_
