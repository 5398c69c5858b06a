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

#include "bsm/lbfgs.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "bsm/error.h"

namespace bsm {
namespace {

struct Point {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;  // directional derivative
  RealVector grad;
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db), clamped into the
// interior of [a, b]; falls back to bisection when the cubic is degenerate.
double cubic_step(const Point& a, const Point& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * d2;
    if (denom != 0.0) {
      const double cand = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
      if (std::isfinite(cand)) t = cand;
    }
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(t, lo + margin, hi - margin);
}

class LineSearch {
 public:
  LineSearch(const GradientObjective& objective, const RealVector& x, const RealVector& direction,
             double value0, double slope0, const LbfgsOptions& options, int& evaluations)
      : objective_(objective), x_(x), direction_(direction), value0_(value0), slope0_(slope0),
        options_(options), evaluations_(evaluations) {}

  std::optional<Point> run(double alpha_init) {
    Point prev{0.0, value0_, slope0_, {}};
    double alpha = alpha_init;
    for (int i = 0; i < options_.max_line_search; ++i) {
      Point cur = evaluate(alpha);
      if (!std::isfinite(cur.value) || cur.value > value0_ + options_.c1 * alpha * slope0_ ||
          (i > 0 && cur.value >= prev.value)) {
        return zoom(prev, cur, options_.max_line_search - i);
      }
      if (std::abs(cur.slope) <= -options_.c2 * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev, options_.max_line_search - i);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return best_armijo();
  }

 private:
  Point evaluate(double alpha) {
    Point p;
    p.alpha = alpha;
    p.grad.resize(x_.size());
    p.value = objective_(x_ + alpha * direction_, p.grad);
    ++evaluations_;
    p.slope = p.grad.dot(direction_);
    if (std::isfinite(p.value) && p.value <= value0_ + options_.c1 * alpha * slope0_ &&
        (!armijo_ || p.value < armijo_->value)) {
      armijo_ = p;
    }
    return p;
  }

  // lo satisfies sufficient decrease with the lowest value seen; hi brackets.
  std::optional<Point> zoom(Point lo, Point hi, int budget) {
    for (int i = 0; i < budget; ++i) {
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      const bool hi_usable = std::isfinite(hi.value) && std::isfinite(hi.slope);
      const double alpha = hi_usable ? cubic_step(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
      Point cur = evaluate(alpha);
      if (!std::isfinite(cur.value) || cur.value > value0_ + options_.c1 * alpha * slope0_ ||
          cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -options_.c2 * slope0_) return cur;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return best_armijo();
  }

  std::optional<Point> best_armijo() const { return armijo_; }

  const GradientObjective& objective_;
  const RealVector& x_;
  const RealVector& direction_;
  double value0_;
  double slope0_;
  const LbfgsOptions& options_;
  int& evaluations_;
  std::optional<Point> armijo_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const GradientObjective& objective, RealVector x0, const LbfgsOptions& options,
                           const std::function<void(const LbfgsRecord&)>& on_iteration) {
  if (options.memory < 1 || options.max_iter < 0 || !(options.grad_tol >= 0.0) ||
      !(0.0 < options.c1 && options.c1 < options.c2 && options.c2 < 1.0)) {
    throw Error(ErrorCode::kConfig, "invalid L-BFGS options");
  }
  LbfgsResult result;
  result.x = std::move(x0);
  RealVector grad(result.x.size());
  result.value = objective(result.x, grad);
  result.evaluations = 1;
  if (!std::isfinite(result.value) || !grad.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "objective is not finite at the starting point");
  }
  auto record = [&](int iter, double step) {
    LbfgsRecord rec{iter, result.value, grad.norm(), step};
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);
  };
  record(0, 0.0);

  std::deque<RealVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  bool reset_pending = false;

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    if (grad.norm() < options.grad_tol) {
      result.status = LbfgsStatus::kConverged;
      return result;
    }
    // Two-loop recursion.
    RealVector q = -grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    RealVector direction = std::move(q);
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / grad.norm()) : 1.0;
    LineSearch search(objective, result.x, direction, result.value, slope, options, result.evaluations);
    auto accepted = search.run(alpha0);
    if (!accepted || !(accepted->value < result.value)) {
      if (!s_hist.empty() && !reset_pending) {
        s_hist.clear(), y_hist.clear(), rho_hist.clear();
        reset_pending = true;
        --iter;
        continue;
      }
      result.status = LbfgsStatus::kLineSearchFailed;
      result.warning = true;
      result.iterations = iter - 1;
      return result;
    }
    reset_pending = false;
    RealVector s = accepted->alpha * direction;
    RealVector y = accepted->grad - grad;
    const double sy = s.dot(y);
    result.x += s;
    result.value = accepted->value;
    grad = std::move(accepted->grad);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
    }
    result.iterations = iter;
    record(iter, accepted->alpha);
  }
  result.status = grad.norm() < options.grad_tol ? LbfgsStatus::kConverged : LbfgsStatus::kMaxIterations;
  return result;
}

}  // namespace bsm
