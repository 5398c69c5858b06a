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

#ifndef BSM_GAMMATONE_H_
#define BSM_GAMMATONE_H_

#include <vector>

#include "bsm/types.h"

namespace bsm {

// Glasberg & Moore equivalent rectangular bandwidth, 24.7 (4.37 f/1000 + 1).
double erb_bandwidth(double f0_hz);

// ERB-rate scale 21.4 log10(4.37 f/1000 + 1) and its inverse.
double erb_rate(double f_hz);
double erb_rate_to_hz(double erb);

// Power weighting of a 4th-order gammatone centred at f0, peak-normalized:
//   [1 + ((f - f0) / b)^2]^-4,  b = 1.019 ERB(f0).
// Zero-phase magnitude-domain form; only |G|^2 enters the ILD integrals.
double gammatone_weight(double f0_hz, double f_hz);

// Centres at integer multiples of step_erb on the ERB-rate scale that fall
// inside [f_lo, f_hi]. A range too narrow to contain a multiple yields its
// ERB-rate midpoint.
std::vector<double> erb_spaced_centers(double f_lo_hz, double f_hi_hz, double step_erb);

struct IldSpec {
  std::vector<double> centers_hz;  // f0 values, sorted
  double band_lo_hz = 1500.0;      // f1
  double band_hi_hz = 20000.0;     // f2
  std::vector<Direction> horizontal_directions;

  void validate() const;
};

IldSpec make_ild_spec(double band_lo_hz, double band_hi_hz, double step_erb,
                      std::vector<Direction> horizontal_directions);

}  // namespace bsm

#endif  // BSM_GAMMATONE_H_
