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

#include "bsm/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bsm/error.h"
#include "bsm/imagls.h"
#include "bsm/parallel.h"

namespace bsm {
namespace {

template <typename Numerator>
RealVector ratio_db(const std::vector<ComplexMatrix>& z, const std::vector<ComplexMatrix>& p,
                    std::span<const double> weights, Numerator numerator) {
  if (z.size() != p.size()) throw Error(ErrorCode::kDimensionMismatch, "z and p differ in bin count");
  RealVector out(static_cast<Eigen::Index>(z.size()));
  for (std::size_t f = 0; f < z.size(); ++f) {
    const auto K = p[f].rows();
    if (z[f].rows() != K || z[f].cols() != 2 || p[f].cols() != 2 || static_cast<std::size_t>(K) != weights.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "bin " + std::to_string(f) + " has inconsistent dimensions");
    }
    double linear = 0.0;
    for (Eigen::Index e = 0; e < 2; ++e) {
      double num = 0.0, den = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        num += weights[k] * numerator(p[f](k, e), z[f](k, e));
        den += weights[k] * std::norm(p[f](k, e));
      }
      if (!(den > 0.0)) throw Error(ErrorCode::kDegeneratePower, "zero target power in bin " + std::to_string(f));
      linear += 0.5 * num / den;
    }
    out(static_cast<Eigen::Index>(f)) = to_db_floored(linear);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

double to_db_floored(double power_ratio) {
  if (!(power_ratio > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(power_ratio));
}

std::vector<ComplexMatrix> estimated_binaural(const FilterBank& bank, const std::vector<ComplexMatrix>& steering) {
  if (bank.coeffs.size() != steering.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bank and steering differ in bin count");
  }
  std::vector<ComplexMatrix> z(steering.size());
  for (std::size_t f = 0; f < steering.size(); ++f) {
    if (steering[f].rows() != bank.coeffs[f].rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "bank and steering differ in microphone count");
    }
    z[f] = (bank.coeffs[f].adjoint() * steering[f]).transpose();
  }
  return z;
}

RealVector nmse_db(const std::vector<ComplexMatrix>& z, const std::vector<ComplexMatrix>& p,
                   std::span<const double> weights) {
  return ratio_db(z, p, weights, [](Complex pk, Complex zk) { return std::norm(pk - zk); });
}

RealVector magnitude_error_db(const std::vector<ComplexMatrix>& z, const std::vector<ComplexMatrix>& p,
                              std::span<const double> weights) {
  return ratio_db(z, p, weights, [](Complex pk, Complex zk) {
    const double d = std::abs(pk) - std::abs(zk);
    return d * d;
  });
}

std::vector<std::pair<double, std::size_t>> EvalReport::half_plane_rows() const {
  std::vector<std::pair<double, std::size_t>> rows;
  for (std::size_t l = 0; l < horizontal_phi_deg.size(); ++l) {
    double phi = horizontal_phi_deg[l];
    if (std::abs(phi + 180.0) < 1e-9) phi = 180.0;
    if (phi >= -1e-9 && phi <= 180.0 + 1e-9) rows.emplace_back(std::max(phi, 0.0), l);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return rows;
}

const MethodCurves& EvalReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  throw Error(ErrorCode::kConfig, "no method named '" + name + "' in report");
}

EvalReport ild_error_report(const DesignProblem& problem, std::span<const NamedBank> banks, const IldSpec& spec) {
  problem.validate();
  spec.validate();
  if (problem.horizontal.empty()) throw Error(ErrorCode::kConfig, "design problem has no horizontal directions");
  EvalReport report;
  std::vector<std::size_t> band;
  for (std::size_t f = 0; f < problem.num_bins(); ++f) {
    const double freq = problem.frequencies_hz[f];
    if (freq >= spec.band_lo_hz && freq < spec.band_hi_hz) {
      band.push_back(f);
      report.frequencies_hz.push_back(freq);
    }
  }
  if (band.empty()) throw Error(ErrorCode::kGridMismatch, "no bins inside the evaluation band");
  report.centers_hz = spec.centers_hz;
  for (const auto& d : problem.horizontal.directions) report.horizontal_phi_deg.push_back(rad_to_deg(d.phi));

  const auto L = static_cast<Eigen::Index>(problem.horizontal.directions.size());
  const auto Fb = static_cast<Eigen::Index>(band.size());
  std::vector<ComplexMatrix> grid_steering, grid_target;
  for (auto f : band) {
    grid_steering.push_back(problem.steering[f]);
    grid_target.push_back(problem.target[f]);
  }
  ComplexMatrix tl(L, Fb), tr(L, Fb);
  for (Eigen::Index b = 0; b < Fb; ++b) {
    tl.col(b) = problem.horizontal.target[band[b]].col(0);
    tr.col(b) = problem.horizontal.target[band[b]].col(1);
  }
  report.target_ild_db = ild_curve(tl, tr, spec, report.frequencies_hz);

  report.methods.resize(banks.size());
  parallel_for(banks.size(), [&](std::size_t i) {
    const FilterBank& bank = *banks[i].bank;
    if (bank.frequencies_hz != problem.frequencies_hz || bank.num_mics() != problem.num_mics()) {
      throw Error(ErrorCode::kGridMismatch, "bank '" + banks[i].name + "' does not match the design grid");
    }
    MethodCurves& m = report.methods[i];
    m.name = banks[i].name;
    FilterBank band_bank;
    for (auto f : band) {
      band_bank.frequencies_hz.push_back(problem.frequencies_hz[f]);
      band_bank.coeffs.push_back(bank.coeffs[f]);
    }
    const auto z = estimated_binaural(band_bank, grid_steering);
    m.nmse_db = nmse_db(z, grid_target, problem.weights);
    m.mag_error_db = magnitude_error_db(z, grid_target, problem.weights);
    ComplexMatrix zl(L, Fb), zr(L, Fb);
    for (Eigen::Index b = 0; b < Fb; ++b) {
      const ComplexMatrix zh = (bank.coeffs[band[b]].adjoint() * problem.horizontal.steering[band[b]]).transpose();
      zl.col(b) = zh.col(0);
      zr.col(b) = zh.col(1);
    }
    m.ild_db = ild_curve(zl, zr, spec, report.frequencies_hz);
    m.ild_abs_error_db = (report.target_ild_db - m.ild_db).cwiseAbs();
    m.ild_error_vs_freq = m.ild_abs_error_db.colwise().mean().transpose();
    m.ild_error_vs_angle = m.ild_abs_error_db.rowwise().mean();
  });
  report.metadata["band_lo_hz"] = spec.band_lo_hz;
  report.metadata["band_hi_hz"] = spec.band_hi_hz;
  report.metadata["num_directions"] = problem.num_directions();
  report.metadata["num_horizontal_directions"] = L;
  nlohmann::json names = nlohmann::json::array();
  for (const auto& b : banks) names.push_back(b.name);
  report.metadata["methods"] = names;
  return report;
}

double mean_ild_error_db(const MethodCurves& curves) { return curves.ild_abs_error_db.mean(); }

double mean_in_band(const RealVector& curve, std::span<const double> frequencies_hz, double lo_hz, double hi_hz) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
    if (frequencies_hz[i] >= lo_hz && frequencies_hz[i] <= hi_hz) {
      sum += curve(static_cast<Eigen::Index>(i));
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kGridMismatch, "no frequencies in the requested range");
  return sum / count;
}

double mean_ild_error_in_angles(const EvalReport& report, const MethodCurves& curves, double lo_deg, double hi_deg) {
  double sum = 0.0;
  int count = 0;
  for (const auto& [phi, row] : report.half_plane_rows()) {
    if (phi >= lo_deg - 1e-9 && phi <= hi_deg + 1e-9) {
      sum += curves.ild_error_vs_angle(static_cast<Eigen::Index>(row));
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::kGridMismatch, "no horizontal directions in the requested range");
  return sum / count;
}

void write_report_csvs(const EvalReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  {
    auto out = open_csv(directory / "nmse.csv");
    out << "freq_hz";
    for (const auto& m : report.methods) out << ",nmse_db_" << m.name;
    out << '\n';
    for (std::size_t i = 0; i < report.frequencies_hz.size(); ++i) {
      out << format_double(report.frequencies_hz[i]);
      for (const auto& m : report.methods) out << ',' << format_double(m.nmse_db(static_cast<Eigen::Index>(i)));
      out << '\n';
    }
  }
  {
    auto out = open_csv(directory / "magnitude.csv");
    out << "freq_hz";
    for (const auto& m : report.methods) out << ",mag_err_db_" << m.name;
    out << '\n';
    for (std::size_t i = 0; i < report.frequencies_hz.size(); ++i) {
      out << format_double(report.frequencies_hz[i]);
      for (const auto& m : report.methods) out << ',' << format_double(m.mag_error_db(static_cast<Eigen::Index>(i)));
      out << '\n';
    }
  }
  {
    auto out = open_csv(directory / "ild_vs_freq.csv");
    out << "f0_hz";
    for (const auto& m : report.methods) out << ",ild_err_db_" << m.name;
    out << '\n';
    for (std::size_t c = 0; c < report.centers_hz.size(); ++c) {
      out << format_double(report.centers_hz[c]);
      for (const auto& m : report.methods) {
        out << ',' << format_double(m.ild_error_vs_freq(static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
  }
  {
    auto out = open_csv(directory / "ild_vs_angle.csv");
    out << "phi_deg,ild_db_target";
    for (const auto& m : report.methods) out << ",ild_db_" << m.name;
    for (const auto& m : report.methods) out << ",ild_err_db_" << m.name;
    out << '\n';
    for (const auto& [phi, row] : report.half_plane_rows()) {
      const auto l = static_cast<Eigen::Index>(row);
      out << format_double(phi) << ',' << format_double(report.target_ild_db.row(l).mean());
      for (const auto& m : report.methods) out << ',' << format_double(m.ild_db.row(l).mean());
      for (const auto& m : report.methods) out << ',' << format_double(m.ild_error_vs_angle(l));
      out << '\n';
    }
  }
}

}  // namespace bsm
