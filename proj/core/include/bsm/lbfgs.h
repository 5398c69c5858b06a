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

#ifndef BSM_LBFGS_H_
#define BSM_LBFGS_H_

#include <functional>
#include <string>
#include <vector>

#include "bsm/types.h"

namespace bsm {

// Returns f(x) and writes the gradient into `grad` (already sized like x).
using GradientObjective = std::function<double(const RealVector& x, RealVector& grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 500;
  double grad_tol = 1e-6;  // on the Euclidean gradient norm
  double c1 = 1e-4;        // sufficient decrease
  double c2 = 0.9;         // curvature (strong Wolfe)
  int max_line_search = 30;
};

enum class LbfgsStatus { kConverged, kMaxIterations, kLineSearchFailed };

struct LbfgsRecord {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct LbfgsResult {
  RealVector x;
  double value = 0.0;
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
  int iterations = 0;
  int evaluations = 0;
  bool warning = false;  // line search failed even after a memory reset
  std::vector<LbfgsRecord> history;  // entry 0 is the starting point
};

// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic
// zoom). On a line-search failure the curvature memory is dropped and the
// step retried along -grad once; a second failure returns the best iterate
// with `warning` set.
LbfgsResult minimize_lbfgs(const GradientObjective& objective, RealVector x0, const LbfgsOptions& options,
                           const std::function<void(const LbfgsRecord&)>& on_iteration = {});

}  // namespace bsm

#endif  // BSM_LBFGS_H_
