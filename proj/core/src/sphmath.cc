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

#include "bsm/sphmath.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsm/error.h"

namespace bsm::sph {
namespace {

constexpr double kTinyArgument = 1.0e-12;

void check_order(int n) {
  if (n < 0 || n > kMaxOrder) {
    throw Error(ErrorCode::kDomain, "order " + std::to_string(n) + " outside [0, " +
                                        std::to_string(kMaxOrder) + "]");
  }
}

void check_argument(double x, bool allow_zero) {
  if (!std::isfinite(x) || x < 0.0 || (!allow_zero && x == 0.0) || x > kMaxArgument) {
    throw Error(ErrorCode::kDomain, "argument " + std::to_string(x) + " outside validated range");
  }
}

double j0_closed(double x) { return std::sin(x) / x; }

double j1_closed(double x) {
  if (x < 0.1) {
    const double x2 = x * x;
    return x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0)));
  }
  return std::sin(x) / (x * x) - std::cos(x) / x;
}

}  // namespace

std::vector<double> bessel_j_all(int n_max, double x) {
  check_order(n_max);
  check_argument(x, /*allow_zero=*/true);
  std::vector<double> out(n_max + 1, 0.0);
  if (x < kTinyArgument) {
    out[0] = 1.0;
    return out;
  }
  if (x > n_max) {
    // Forward recurrence is stable while n < x.
    out[0] = j0_closed(x);
    if (n_max >= 1) out[1] = j1_closed(x);
    for (int n = 1; n < n_max; ++n) {
      out[n + 1] = (2.0 * n + 1.0) / x * out[n] - out[n - 1];
    }
    return out;
  }
  // Miller's downward recurrence from well above max(n_max, x), normalized
  // against whichever of j_0, j_1 is larger in magnitude.
  const double top = std::max<double>(n_max, std::ceil(x));
  const int start = static_cast<int>(top) + 30 + static_cast<int>(std::sqrt(40.0 * top));
  double next = 0.0;         // f_{n+1}
  double current = 1e-300;   // f_n
  for (int n = start; n > 0; --n) {
    const double prev = (2.0 * n + 1.0) / x * current - next;
    next = current;
    current = prev;
    if (n - 1 <= n_max) out[n - 1] = current;
    if (std::abs(current) > 1e250) {
      current *= 1e-250;
      next *= 1e-250;
      for (int k = std::max(n - 1, 0); k <= n_max; ++k) out[k] *= 1e-250;
    }
  }
  const double j0 = j0_closed(x);
  const double j1 = j1_closed(x);
  double scale;
  if (std::abs(j0) >= std::abs(j1) || n_max == 0) {
    scale = j0 / out[0];
  } else {
    scale = j1 / out[1];
  }
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> bessel_y_all(int n_max, double x) {
  check_order(n_max);
  check_argument(x, /*allow_zero=*/false);
  std::vector<double> out(n_max + 1);
  out[0] = -std::cos(x) / x;
  if (n_max >= 1) out[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n < n_max; ++n) {
    out[n + 1] = (2.0 * n + 1.0) / x * out[n] - out[n - 1];
  }
  return out;
}

double bessel_j(int n, double x) { return bessel_j_all(n, x)[n]; }

double bessel_y(int n, double x) {
  const double v = bessel_y_all(n, x)[n];
  if (!std::isfinite(v)) throw Error(ErrorCode::kDomain, "y_n overflow");
  return v;
}

Complex hankel_h1(int n, double x) { return {bessel_j(n, x), bessel_y(n, x)}; }

double derivative_j(int n, double x) {
  check_order(n);
  check_argument(x, /*allow_zero=*/true);
  if (x < kTinyArgument) return n == 1 ? 1.0 / 3.0 : 0.0;
  const auto j = bessel_j_all(std::min(n + 1, kMaxOrder), x);
  if (n == 0) return -j[1];
  return j[n - 1] - (n + 1.0) / x * j[n];
}

double derivative_y(int n, double x) {
  check_order(n);
  const auto y = bessel_y_all(std::min(n + 1, kMaxOrder), x);
  const double v = n == 0 ? -y[1] : y[n - 1] - (n + 1.0) / x * y[n];
  if (!std::isfinite(v)) throw Error(ErrorCode::kDomain, "y_n' overflow");
  return v;
}

Complex derivative_h1(int n, double x) { return {derivative_j(n, x), derivative_y(n, x)}; }

Complex derivative(Kind kind, int n, double x) {
  switch (kind) {
    case Kind::kBesselJ: return {derivative_j(n, x), 0.0};
    case Kind::kBesselY: return {derivative_y(n, x), 0.0};
    case Kind::kHankelH1: return derivative_h1(n, x);
  }
  return {};
}

std::vector<Complex> hankel_h1_log_derivative_inverse(int n_max, double x) {
  check_order(n_max);
  check_argument(x, /*allow_zero=*/false);
  std::vector<Complex> out(n_max + 1);
  // ratio = h_{n-1} / h_n; h_{-1} = e^{ix}/x and h_0 = -i e^{ix}/x give i.
  Complex ratio(0.0, 1.0);
  for (int n = 0; n <= n_max; ++n) {
    out[n] = 1.0 / (ratio - (n + 1.0) / x);
    // h_{n+1}/h_n = (2n+1)/x - h_{n-1}/h_n
    ratio = 1.0 / ((2.0 * n + 1.0) / x - ratio);
  }
  return out;
}

double legendre_p(int n, double x) {
  std::vector<double> p;
  legendre_p_all(n, x, p);
  return p[n];
}

void legendre_p_all(int n_max, double x, std::vector<double>& out) {
  if (n_max < 0) throw Error(ErrorCode::kDomain, "negative Legendre order");
  if (!(std::abs(x) <= 1.0)) {
    throw Error(ErrorCode::kDomain, "Legendre argument outside [-1, 1]");
  }
  out.resize(n_max + 1);
  out[0] = 1.0;
  if (n_max >= 1) out[1] = x;
  for (int n = 1; n < n_max; ++n) {
    out[n + 1] = ((2.0 * n + 1.0) * x * out[n] - n * out[n - 1]) / (n + 1.0);
  }
}

}  // namespace bsm::sph
