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

#include "bsm/array_model.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bsm/error.h"
#include "bsm/sphmath.h"

namespace bsm {
namespace {

constexpr int kTruncationCap = 120;
constexpr double kTruncationDecay = 1e-12;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig,
                "geometry line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
}

void fnv1a(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
}

}  // namespace

std::string_view baffle_name(Baffle baffle) {
  return baffle == Baffle::kRigidSphere ? "rigid_sphere" : "open";
}

Baffle parse_baffle(std::string_view name) {
  if (name == "rigid_sphere" || name == "rigid") return Baffle::kRigidSphere;
  if (name == "open") return Baffle::kOpen;
  throw Error(ErrorCode::kConfig, "unknown baffle '" + std::string(name) + "'");
}

ArrayGeometry ArrayGeometry::semicircular6() {
  ArrayGeometry g;
  g.radius_m = 0.10;
  g.baffle = Baffle::kRigidSphere;
  for (double phi : {22.0, 45.0, 65.0}) {
    g.mic_directions.push_back(Direction::from_degrees(90.0, phi));
    g.mic_directions.push_back(Direction::from_degrees(90.0, -phi));
  }
  return g;
}

void ArrayGeometry::validate() const {
  if (!(std::isfinite(radius_m) && radius_m > 0.0)) {
    throw Error(ErrorCode::kConfig, "array radius must be finite and positive");
  }
  if (mic_directions.empty()) throw Error(ErrorCode::kConfig, "array has no microphones");
  for (const auto& d : mic_directions) {
    if (!d.valid()) throw Error(ErrorCode::kConfig, "invalid microphone direction");
  }
}

std::uint64_t ArrayGeometry::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  fnv1a(h, &radius_m, sizeof radius_m);
  const int b = static_cast<int>(baffle);
  fnv1a(h, &b, sizeof b);
  for (const auto& d : mic_directions) {
    fnv1a(h, &d.theta, sizeof d.theta);
    fnv1a(h, &d.phi, sizeof d.phi);
  }
  return h;
}

std::uint64_t fingerprint(std::span<const Direction> directions) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& d : directions) {
    fnv1a(h, &d.theta, sizeof d.theta);
    fnv1a(h, &d.phi, sizeof d.phi);
  }
  return h;
}

ArrayGeometry parse_geometry(std::string_view text) {
  ArrayGeometry g;
  g.mic_directions.clear();
  bool have_radius = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig, "geometry line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "radius_m") {
      g.radius_m = parse_number(value, line_no);
      have_radius = true;
    } else if (key == "baffle") {
      g.baffle = parse_baffle(value);
    } else if (key == "mic") {
      const auto comma = value.find(',');
      if (comma == std::string::npos) {
        throw Error(ErrorCode::kConfig, "geometry line " + std::to_string(line_no) + ": mic needs theta_deg, phi_deg");
      }
      const double theta = parse_number(trim(std::string_view(value).substr(0, comma)), line_no);
      const double phi = parse_number(trim(std::string_view(value).substr(comma + 1)), line_no);
      if (theta < 0.0 || theta > 180.0) {
        throw Error(ErrorCode::kConfig, "geometry line " + std::to_string(line_no) + ": theta outside [0, 180]");
      }
      g.mic_directions.push_back(Direction::from_degrees(theta, phi));
    } else {
      throw Error(ErrorCode::kConfig, "geometry line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_radius) throw Error(ErrorCode::kConfig, "geometry: missing radius_m");
  g.validate();
  return g;
}

ArrayGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open geometry file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_geometry(buffer.str());
}

std::string format_geometry(const ArrayGeometry& geometry) {
  std::ostringstream out;
  out.precision(17);
  out << "radius_m = " << geometry.radius_m << "\n";
  out << "baffle = " << baffle_name(geometry.baffle) << "\n";
  for (const auto& d : geometry.mic_directions) {
    out << "mic = " << rad_to_deg(d.theta) << ", " << rad_to_deg(d.phi) << "\n";
  }
  return out.str();
}

double wavenumber(double frequency_hz) { return 2.0 * kPi * frequency_hz / kSpeedOfSound; }

std::vector<Complex> radial_functions(int n_max, double ka, Baffle baffle) {
  if (!(ka >= 0.0) || !std::isfinite(ka)) throw Error(ErrorCode::kDomain, "ka must be >= 0");
  std::vector<Complex> b(n_max + 1);
  const auto j = sph::bessel_j_all(std::min(n_max + 1, sph::kMaxOrder), ka);
  const bool rigid = baffle == Baffle::kRigidSphere && ka > 0.0;
  std::vector<Complex> h_over_dh;
  if (rigid) h_over_dh = sph::hankel_h1_log_derivative_inverse(n_max, ka);
  Complex minus_i_pow(1.0, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    Complex radial = j[n];
    if (rigid) {
      const double dj = n == 0 ? -j[1] : j[n - 1] - (n + 1.0) / ka * j[n];
      radial -= dj * h_over_dh[n];
    }
    b[n] = 4.0 * kPi * minus_i_pow * radial;
    minus_i_pow *= Complex(0.0, -1.0);
  }
  return b;
}

Complex radial_function_bn(int n, double ka, Baffle baffle) {
  return radial_functions(n, ka, baffle)[n];
}

int truncation_order(double ka, Baffle baffle) {
  if (!(ka >= 0.0) || !std::isfinite(ka)) throw Error(ErrorCode::kDomain, "ka must be >= 0");
  const int floor_order = static_cast<int>(std::ceil(ka)) + 10;
  if (floor_order >= kTruncationCap) return kTruncationCap;
  const auto b = radial_functions(kTruncationCap, ka, baffle);
  double peak = 0.0;
  for (const auto& v : b) peak = std::max(peak, std::abs(v));
  for (int n = floor_order; n <= kTruncationCap; ++n) {
    if (std::abs(b[n]) < kTruncationDecay * peak) return n;
  }
  return kTruncationCap;
}

namespace {

// sum_n coeff[n] P_n(x), with P_n from the Bonnet recurrence.
Complex legendre_series(const std::vector<Complex>& coeff, double x) {
  Complex acc = coeff[0];
  if (coeff.size() == 1) return acc;
  double p_prev = 1.0;
  double p = x;
  acc += coeff[1] * p;
  for (std::size_t n = 1; n + 1 < coeff.size(); ++n) {
    const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
    p_prev = p;
    p = p_next;
    acc += coeff[n + 1] * p;
  }
  return acc;
}

std::vector<Complex> mode_coefficients(const ArrayGeometry& geometry, double frequency_hz, int order) {
  if (!(frequency_hz >= 0.0) || !std::isfinite(frequency_hz)) {
    throw Error(ErrorCode::kDomain, "frequency must be >= 0");
  }
  if (order < 0 || order > sph::kMaxOrder - 1) throw Error(ErrorCode::kDomain, "bad expansion order");
  const double ka = wavenumber(frequency_hz) * geometry.radius_m;
  auto coeff = radial_functions(order, ka, geometry.baffle);
  for (int n = 0; n <= order; ++n) coeff[n] *= (2.0 * n + 1.0) / (4.0 * kPi);
  return coeff;
}

}  // namespace

ComplexVector steering_vector(const ArrayGeometry& geometry, double frequency_hz,
                              const Direction& source, int order) {
  geometry.validate();
  const auto coeff = mode_coefficients(geometry, frequency_hz, order);
  ComplexVector v(geometry.num_mics());
  for (std::size_t m = 0; m < geometry.num_mics(); ++m) {
    v(m) = legendre_series(coeff, cos_angle_between(geometry.mic_directions[m], source));
  }
  return v;
}

SteeringMatrix steering_matrix(const ArrayGeometry& geometry, double frequency_hz,
                               std::span<const Direction> grid, int order) {
  geometry.validate();
  const auto coeff = mode_coefficients(geometry, frequency_hz, order);
  SteeringMatrix out;
  out.frequency_hz = frequency_hz;
  out.order = order;
  out.geometry_fingerprint = geometry.fingerprint();
  out.grid_fingerprint = fingerprint(grid);
  const double ka = wavenumber(frequency_hz) * geometry.radius_m;
  out.truncation_warning = order < static_cast<int>(std::ceil(ka));
  out.entries.resize(static_cast<Eigen::Index>(geometry.num_mics()),
                     static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t m = 0; m < geometry.num_mics(); ++m) {
      out.entries(m, k) = legendre_series(coeff, cos_angle_between(geometry.mic_directions[m], grid[k]));
    }
  }
  return out;
}

SteeringMatrix steering_matrix(const ArrayGeometry& geometry, double frequency_hz,
                               std::span<const Direction> grid) {
  const double ka = wavenumber(frequency_hz) * geometry.radius_m;
  return steering_matrix(geometry, frequency_hz, grid, truncation_order(ka, geometry.baffle));
}

}  // namespace bsm
