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

#ifndef BSM_SPHMATH_H_
#define BSM_SPHMATH_H_

#include "bsm/types.h"

// Scalar special functions for the rigid-sphere scattering model. All entry
// points are pure; arguments outside the validated range raise
// Error(kDomain).
namespace bsm::sph {

inline constexpr int kMaxOrder = 200;
inline constexpr double kMaxArgument = 1.0e4;

// Spherical Bessel function of the first kind j_n(x), x >= 0.
double bessel_j(int n, double x);

// Spherical Bessel function of the second kind y_n(x), x > 0.
double bessel_y(int n, double x);

// Spherical Hankel function of the first kind h_n^(1)(x) = j_n(x) + i y_n(x).
Complex hankel_h1(int n, double x);

// All orders 0..n_max at once; the per-order functions call these.
std::vector<double> bessel_j_all(int n_max, double x);
std::vector<double> bessel_y_all(int n_max, double x);

// f_n'(x) = f_{n-1}(x) - (n+1)/x f_n(x), with f_0' = -f_1.
double derivative_j(int n, double x);
double derivative_y(int n, double x);
Complex derivative_h1(int n, double x);

enum class Kind { kBesselJ, kBesselY, kHankelH1 };

// Dispatching form of the derivatives above; real kinds return im = 0.
Complex derivative(Kind kind, int n, double x);

// h_n^(1)(x) / h_n^(1)'(x) for n = 0..n_max, evaluated through the ratio
// recurrence h_{n-1}/h_n so it stays finite where h_n itself overflows.
std::vector<Complex> hankel_h1_log_derivative_inverse(int n_max, double x);

// Legendre polynomial P_n(x) by the Bonnet recurrence, |x| <= 1.
double legendre_p(int n, double x);

// P_0(x) .. P_{n_max}(x).
void legendre_p_all(int n_max, double x, std::vector<double>& out);

}  // namespace bsm::sph

#endif  // BSM_SPHMATH_H_
