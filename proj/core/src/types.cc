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

#include "bsm/types.h"

#include <algorithm>
#include <cmath>

namespace bsm {

double wrap_phi(double phi) {
  double wrapped = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (wrapped >= kPi) wrapped -= 2.0 * kPi;
  return wrapped;
}

Direction Direction::from_degrees(double theta_deg, double phi_deg) {
  return Direction{deg_to_rad(theta_deg), wrap_phi(deg_to_rad(phi_deg))};
}

bool Direction::valid() const {
  return std::isfinite(theta) && std::isfinite(phi) && theta >= 0.0 &&
         theta <= kPi && phi >= -kPi && phi < kPi;
}

Direction mirror_sagittal(const Direction& d) {
  return Direction{d.theta, wrap_phi(-d.phi)};
}

double cos_angle_between(const Direction& a, const Direction& b) {
  const double c = std::cos(a.theta) * std::cos(b.theta) +
                   std::sin(a.theta) * std::sin(b.theta) * std::cos(a.phi - b.phi);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace bsm
