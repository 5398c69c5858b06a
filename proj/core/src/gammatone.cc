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

#include "bsm/gammatone.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsm/error.h"

namespace bsm {

double erb_bandwidth(double f0_hz) {
  if (!(f0_hz > 0.0) || !std::isfinite(f0_hz)) {
    throw Error(ErrorCode::kDomain, "gammatone centre must be positive");
  }
  return 24.7 * (4.37 * f0_hz / 1000.0 + 1.0);
}

double erb_rate(double f_hz) { return 21.4 * std::log10(4.37 * f_hz / 1000.0 + 1.0); }

double erb_rate_to_hz(double erb) { return (std::pow(10.0, erb / 21.4) - 1.0) * 1000.0 / 4.37; }

double gammatone_weight(double f0_hz, double f_hz) {
  const double b = 1.019 * erb_bandwidth(f0_hz);
  if (!(f_hz >= 0.0) || !std::isfinite(f_hz)) throw Error(ErrorCode::kDomain, "frequency must be >= 0");
  const double u = (f_hz - f0_hz) / b;
  const double s = 1.0 + u * u;
  const double s2 = s * s;
  return 1.0 / (s2 * s2);
}

std::vector<double> erb_spaced_centers(double f_lo_hz, double f_hi_hz, double step_erb) {
  if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz) || !(step_erb > 0.0) || !std::isfinite(f_hi_hz)) {
    throw Error(ErrorCode::kDomain, "need 0 < f_lo < f_hi and step > 0");
  }
  const double e_lo = erb_rate(f_lo_hz);
  const double e_hi = erb_rate(f_hi_hz);
  std::vector<double> centers;
  for (auto i = static_cast<long>(std::ceil(e_lo / step_erb)); i * step_erb <= e_hi; ++i) {
    const double f = std::clamp(erb_rate_to_hz(i * step_erb), f_lo_hz, f_hi_hz);
    if (centers.empty() || f > centers.back()) centers.push_back(f);
  }
  if (centers.empty()) centers.push_back(erb_rate_to_hz(0.5 * (e_lo + e_hi)));
  return centers;
}

void IldSpec::validate() const {
  if (!(band_lo_hz < band_hi_hz) || !(band_lo_hz >= 0.0)) {
    throw Error(ErrorCode::kConfig, "ILD band needs f1 < f2");
  }
  if (centers_hz.empty()) throw Error(ErrorCode::kConfig, "ILD spec has no gammatone centres");
  for (std::size_t i = 0; i < centers_hz.size(); ++i) {
    if (centers_hz[i] < band_lo_hz || centers_hz[i] > band_hi_hz) {
      throw Error(ErrorCode::kConfig, "gammatone centre " + std::to_string(centers_hz[i]) + " outside band");
    }
    if (i > 0 && !(centers_hz[i] > centers_hz[i - 1])) {
      throw Error(ErrorCode::kConfig, "gammatone centres not increasing");
    }
  }
  if (horizontal_directions.empty()) throw Error(ErrorCode::kConfig, "ILD spec has no horizontal directions");
}

IldSpec make_ild_spec(double band_lo_hz, double band_hi_hz, double step_erb,
                      std::vector<Direction> horizontal_directions) {
  IldSpec spec;
  spec.band_lo_hz = band_lo_hz;
  spec.band_hi_hz = band_hi_hz;
  spec.centers_hz = erb_spaced_centers(band_lo_hz, band_hi_hz, step_erb);
  spec.horizontal_directions = std::move(horizontal_directions);
  spec.validate();
  return spec;
}

}  // namespace bsm
