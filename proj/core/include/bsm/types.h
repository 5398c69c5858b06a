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

#ifndef BSM_TYPES_H_
#define BSM_TYPES_H_

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace bsm {

// All complex quantities (HRTFs, steering vectors, filters) use the time
// convention exp(-i 2 pi f t): outgoing spherical waves are h_n^(1) and a
// propagation delay tau multiplies a response by exp(+i 2 pi f tau). A real
// signal's spectrum in this convention is the complex conjugate of its DFT.
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfSound = 343.0;  // m/s

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Maps any angle onto [-pi, pi).
double wrap_phi(double phi);

// theta: colatitude from the positive vertical axis, [0, pi].
// phi: azimuth counterclockwise from the sagittal (frontal) axis, [-pi, pi).
struct Direction {
  double theta = kPi / 2;
  double phi = 0.0;

  static Direction from_degrees(double theta_deg, double phi_deg);
  bool valid() const;

  friend bool operator==(const Direction&, const Direction&) = default;
};

// Reflection across the sagittal (median) plane: phi -> -phi.
Direction mirror_sagittal(const Direction& d);

// cos of the great-circle angle between two directions, clamped to [-1, 1].
double cos_angle_between(const Direction& a, const Direction& b);

}  // namespace bsm

#endif  // BSM_TYPES_H_
