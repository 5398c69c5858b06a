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

#include "bsm/imagls.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "bsm/error.h"
#include "bsm/parallel.h"

namespace bsm {
namespace {

constexpr double kDbPerNeper = 10.0 / 2.302585092994045684;  // 10 / ln(10)

}  // namespace

double smooth_abs(double x, double eps) { return std::sqrt(x * x + eps); }

double smooth_abs(Complex x, double eps) { return std::sqrt(std::norm(x) + eps); }

std::vector<double> trapezoid_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> tau(n, 0.0);
  if (n < 2) {
    if (n == 1) tau[0] = 1.0;
    return tau;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (nodes[i + 1] - nodes[i]);
    tau[i] += h;
    tau[i + 1] += h;
  }
  return tau;
}

RealMatrix ild_curve(const ComplexMatrix& left, const ComplexMatrix& right, const IldSpec& spec,
                     std::span<const double> frequencies_hz, double eps) {
  spec.validate();
  const auto F = static_cast<Eigen::Index>(frequencies_hz.size());
  if (left.cols() != F || right.cols() != F || left.rows() != right.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "ILD spectra do not match the frequency grid");
  }
  std::vector<Eigen::Index> cols;
  std::vector<double> freqs;
  for (Eigen::Index f = 0; f < F; ++f) {
    if (frequencies_hz[f] >= spec.band_lo_hz && frequencies_hz[f] < spec.band_hi_hz) {
      cols.push_back(f);
      freqs.push_back(frequencies_hz[f]);
    }
  }
  if (cols.empty()) throw Error(ErrorCode::kGridMismatch, "no frequencies inside the ILD band");
  const auto tau = trapezoid_weights(freqs);
  const auto Nc = static_cast<Eigen::Index>(spec.centers_hz.size());
  const auto Fb = static_cast<Eigen::Index>(cols.size());
  RealMatrix kernel(Nc, Fb);  // tau_f G(f0, f)
  for (Eigen::Index c = 0; c < Nc; ++c) {
    for (Eigen::Index b = 0; b < Fb; ++b) kernel(c, b) = tau[b] * gammatone_weight(spec.centers_hz[c], freqs[b]);
  }
  const auto L = left.rows();
  RealMatrix pl(L, Fb), pr(L, Fb);
  for (Eigen::Index b = 0; b < Fb; ++b) {
    pl.col(b) = left.col(cols[b]).cwiseAbs2();
    pr.col(b) = right.col(cols[b]).cwiseAbs2();
  }
  const RealMatrix num_raw = pl * kernel.transpose();
  const RealMatrix den_raw = pr * kernel.transpose();
  RealMatrix out(L, Nc);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index c = 0; c < Nc; ++c) {
      if (!(num_raw(l, c) > 0.0) && eps == 0.0) {
        throw Error(ErrorCode::kDegeneratePower, "zero left-ear power at direction " + std::to_string(l));
      }
      if (!(den_raw(l, c) > 0.0) && eps == 0.0) {
        throw Error(ErrorCode::kDegeneratePower, "zero right-ear power at direction " + std::to_string(l));
      }
      const double row_mass = kernel.row(c).sum();
      out(l, c) = 10.0 * std::log10((num_raw(l, c) + eps * row_mass) / (den_raw(l, c) + eps * row_mass));
    }
  }
  return out;
}

std::string_view imagls_init_name(ImaglsInit init) {
  switch (init) {
    case ImaglsInit::kMagls: return "magls";
    case ImaglsInit::kMse: return "mse";
    case ImaglsInit::kZeros: return "zeros";
  }
  return "unknown";
}

ImaglsInit parse_imagls_init(std::string_view name) {
  if (name == "magls") return ImaglsInit::kMagls;
  if (name == "mse") return ImaglsInit::kMse;
  if (name == "zeros") return ImaglsInit::kZeros;
  throw Error(ErrorCode::kConfig, "unknown imagls init '" + std::string(name) + "'");
}

std::string_view magnitude_weighting_name(MagnitudeWeighting weighting) {
  switch (weighting) {
    case MagnitudeWeighting::kUniform: return "uniform";
    case MagnitudeWeighting::kErbRate: return "erb_rate";
  }
  return "unknown";
}

MagnitudeWeighting parse_magnitude_weighting(std::string_view name) {
  if (name == "uniform") return MagnitudeWeighting::kUniform;
  if (name == "erb_rate") return MagnitudeWeighting::kErbRate;
  throw Error(ErrorCode::kConfig, "unknown magnitude weighting '" + std::string(name) + "' (uniform, erb_rate)");
}

std::vector<double> magnitude_bin_weights(std::span<const double> band_frequencies_hz, MagnitudeWeighting weighting) {
  const std::size_t n = band_frequencies_hz.size();
  if (n == 0) return {};
  std::vector<double> w(n, 1.0);
  if (weighting == MagnitudeWeighting::kErbRate && n > 1) {
    w = trapezoid_weights(band_frequencies_hz);
    for (std::size_t i = 0; i < n; ++i) w[i] /= erb_bandwidth(band_frequencies_hz[i]);
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

void ImaglsConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::kConfig, "lambda must be >= 0");
  if (!(smoothing_eps > 0.0)) throw Error(ErrorCode::kConfig, "smoothing_eps must be > 0");
  if (max_iter < 0) throw Error(ErrorCode::kConfig, "max_iter must be >= 0");
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::kConfig, "grad_tol must be > 0");
  if (lbfgs_memory < 1) throw Error(ErrorCode::kConfig, "lbfgs_memory must be >= 1");
  ild_spec.validate();
}

ImaglsObjective::ImaglsObjective(const DesignProblem& problem, const ImaglsConfig& config)
    : problem_(problem), config_(config) {
  config_.validate();
  problem_.validate();
  if (problem_.horizontal.empty()) {
    throw Error(ErrorCode::kConfig, "iMagLS needs horizontal-plane directions in the design problem");
  }
  if (config_.ild_spec.horizontal_directions.size() != problem_.horizontal.directions.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "ILD spec and design problem disagree on L");
  }
  mics_ = problem_.num_mics();
  for (std::size_t f = 0; f < problem_.num_bins(); ++f) {
    const double freq = problem_.frequencies_hz[f];
    if (freq >= config_.ild_spec.band_lo_hz && freq < config_.ild_spec.band_hi_hz) {
      band_bins_.push_back(f);
      band_freqs_.push_back(freq);
    }
  }
  if (band_bins_.empty()) throw Error(ErrorCode::kGridMismatch, "no design bins inside the iMagLS band");
  tau_ = trapezoid_weights(band_freqs_);
  beta_ = magnitude_bin_weights(band_freqs_, config_.magnitude_weighting);
  const auto Fb = static_cast<Eigen::Index>(band_bins_.size());
  const auto Nc = static_cast<Eigen::Index>(config_.ild_spec.centers_hz.size());
  gamma_.resize(Nc, Fb);
  for (Eigen::Index c = 0; c < Nc; ++c) {
    for (Eigen::Index b = 0; b < Fb; ++b) {
      gamma_(c, b) = tau_[b] * gammatone_weight(config_.ild_spec.centers_hz[c], band_freqs_[b]);
    }
  }
  const auto K = static_cast<Eigen::Index>(problem_.num_directions());
  const auto L = static_cast<Eigen::Index>(problem_.horizontal.directions.size());
  target_power_.resize(Fb, 2);
  ComplexMatrix left_h(L, Fb), right_h(L, Fb);
  for (int e = 0; e < 2; ++e) target_amp_[e].resize(K, Fb);
  for (Eigen::Index b = 0; b < Fb; ++b) {
    const auto f = band_bins_[b];
    for (int e = 0; e < 2; ++e) {
      target_amp_[e].col(b) = problem_.target[f].col(e).cwiseAbs();
      double power = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) power += problem_.weights[k] * std::norm(problem_.target[f](k, e));
      if (!(power > 0.0)) {
        throw Error(ErrorCode::kDegeneratePower, "zero target power in bin " + std::to_string(f));
      }
      target_power_(b, e) = power;
    }
    left_h.col(b) = problem_.horizontal.target[f].col(0);
    right_h.col(b) = problem_.horizontal.target[f].col(1);
  }
  IldSpec spec = config_.ild_spec;
  spec.horizontal_directions = problem_.horizontal.directions;
  target_ild_ = ild_curve(left_h, right_h, spec, band_freqs_, config_.smoothing_eps);
}

std::size_t ImaglsObjective::num_params() const { return 4 * band_bins_.size() * mics_; }

RealVector ImaglsObjective::pack(const FilterBank& bank) const {
  if (bank.num_bins() != problem_.num_bins() || bank.num_mics() != mics_) {
    throw Error(ErrorCode::kGridMismatch, "bank does not match the design problem");
  }
  RealVector x(static_cast<Eigen::Index>(num_params()));
  const auto M = static_cast<Eigen::Index>(mics_);
  for (std::size_t b = 0; b < band_bins_.size(); ++b) {
    const ComplexMatrix& c = bank.coeffs[band_bins_[b]];
    for (Eigen::Index e = 0; e < 2; ++e) {
      for (Eigen::Index m = 0; m < M; ++m) {
        const Eigen::Index i = ((static_cast<Eigen::Index>(b) * 2 + e) * M + m) * 2;
        x(i) = c(m, e).real();
        x(i + 1) = c(m, e).imag();
      }
    }
  }
  return x;
}

void ImaglsObjective::unpack(const RealVector& x, FilterBank& bank) const {
  const auto M = static_cast<Eigen::Index>(mics_);
  for (std::size_t b = 0; b < band_bins_.size(); ++b) {
    ComplexMatrix& c = bank.coeffs[band_bins_[b]];
    c.resize(M, 2);
    for (Eigen::Index e = 0; e < 2; ++e) {
      for (Eigen::Index m = 0; m < M; ++m) {
        const Eigen::Index i = ((static_cast<Eigen::Index>(b) * 2 + e) * M + m) * 2;
        c(m, e) = {x(i), x(i + 1)};
      }
    }
  }
}

LossBreakdown ImaglsObjective::evaluate(const RealVector& x, RealVector* grad) const {
  if (x.size() != static_cast<Eigen::Index>(num_params())) {
    throw Error(ErrorCode::kDimensionMismatch, "parameter vector has the wrong length");
  }
  const std::size_t Fb = band_bins_.size();
  const auto M = static_cast<Eigen::Index>(mics_);
  const auto K = static_cast<Eigen::Index>(problem_.num_directions());
  const auto L = static_cast<Eigen::Index>(problem_.horizontal.directions.size());
  const auto Nc = gamma_.rows();
  const double eps = config_.smoothing_eps;
  const double lambda = config_.lambda;

  std::vector<ComplexMatrix> coeffs(Fb), rendered(Fb), rendered_h(Fb);
  RealMatrix mag_terms(Fb, 2);
  RealMatrix power_l(L, Fb), power_r(L, Fb);

  parallel_for(Fb, [&](std::size_t b) {
    const auto f = band_bins_[b];
    ComplexMatrix& C = coeffs[b];
    C.resize(M, 2);
    for (Eigen::Index e = 0; e < 2; ++e) {
      for (Eigen::Index m = 0; m < M; ++m) {
        const Eigen::Index i = ((static_cast<Eigen::Index>(b) * 2 + e) * M + m) * 2;
        C(m, e) = {x(i), x(i + 1)};
      }
    }
    rendered[b].noalias() = problem_.steering[f].adjoint() * C;
    rendered_h[b].noalias() = problem_.horizontal.steering[f].adjoint() * C;
    for (int e = 0; e < 2; ++e) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        const double d = target_amp_[e](k, b) - smooth_abs(rendered[b](k, e), eps);
        acc += problem_.weights[k] * d * d;
      }
      mag_terms(b, e) = acc / target_power_(b, e);
    }
    power_l.col(b) = rendered_h[b].col(0).cwiseAbs2();
    power_r.col(b) = rendered_h[b].col(1).cwiseAbs2();
  });

  LossBreakdown out;
  for (std::size_t b = 0; b < Fb; ++b) {
    out.mag_left += beta_[b] * mag_terms(b, 0);
    out.mag_right += beta_[b] * mag_terms(b, 1);
  }

  // Band-integrated powers, L x Nc; eps enters every |z|^2.
  const RealVector mass = gamma_.rowwise().sum();
  RealMatrix num = power_l * gamma_.transpose();
  RealMatrix den = power_r * gamma_.transpose();
  num.rowwise() += eps * mass.transpose();
  den.rowwise() += eps * mass.transpose();
  RealMatrix ild_grad_weight(L, Nc);  // d(ild_term)/d(ILD_est)
  double ild_sum = 0.0;
  const double count = static_cast<double>(L * Nc);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index c = 0; c < Nc; ++c) {
      const double estimate = 10.0 * std::log10(num(l, c) / den(l, c));
      const double diff = target_ild_(l, c) - estimate;
      const double err = smooth_abs(diff, eps);
      ild_sum += err;
      ild_grad_weight(l, c) = -diff / err / count;
    }
  }
  out.ild_term = ild_sum / count;
  out.total = 0.5 * (out.mag_left + out.mag_right) + lambda * out.ild_term;
  if (grad == nullptr) return out;

  // d(total)/d|z_h|^2 at each (direction, band bin) per ear.
  const RealMatrix alpha_left =
      lambda * kDbPerNeper * (ild_grad_weight.array() / num.array()).matrix() * gamma_;
  const RealMatrix alpha_right =
      -lambda * kDbPerNeper * (ild_grad_weight.array() / den.array()).matrix() * gamma_;

  grad->resize(x.size());
  parallel_for(Fb, [&](std::size_t b) {
    const auto f = band_bins_[b];
    ComplexMatrix weighted(K, 2);
    for (Eigen::Index e = 0; e < 2; ++e) {
      const double scale = 0.5 * beta_[b] / target_power_(b, e);
      for (Eigen::Index k = 0; k < K; ++k) {
        const Complex y = rendered[b](k, e);
        const double s = smooth_abs(y, eps);
        const double alpha = scale * problem_.weights[k] * (s - target_amp_[e](k, b)) / s;
        weighted(k, e) = alpha * y;
      }
    }
    ComplexMatrix weighted_h(L, 2);
    weighted_h.col(0) = alpha_left.col(static_cast<Eigen::Index>(b)).cast<Complex>().cwiseProduct(rendered_h[b].col(0));
    weighted_h.col(1) = alpha_right.col(static_cast<Eigen::Index>(b)).cast<Complex>().cwiseProduct(rendered_h[b].col(1));
    ComplexMatrix g = 2.0 * (problem_.steering[f] * weighted + problem_.horizontal.steering[f] * weighted_h);
    for (Eigen::Index e = 0; e < 2; ++e) {
      for (Eigen::Index m = 0; m < M; ++m) {
        const Eigen::Index i = ((static_cast<Eigen::Index>(b) * 2 + e) * M + m) * 2;
        (*grad)(i) = g(m, e).real();
        (*grad)(i + 1) = g(m, e).imag();
      }
    }
  });
  return out;
}

LossBreakdown imagls_loss(const FilterBank& bank, const DesignProblem& problem, const ImaglsConfig& config) {
  const ImaglsObjective objective(problem, config);
  return objective.evaluate(objective.pack(bank), nullptr);
}

FilterBank imagls_gradient(const FilterBank& bank, const DesignProblem& problem, const ImaglsConfig& config) {
  const ImaglsObjective objective(problem, config);
  RealVector g;
  objective.evaluate(objective.pack(bank), &g);
  FilterBank out = bank;
  for (auto& c : out.coeffs) c.setZero();
  objective.unpack(g, out);
  out.metadata = nlohmann::json::object();
  out.metadata["content"] = "imagls_gradient";
  return out;
}

FilterBank optimize_imagls(const DesignProblem& problem, const ImaglsConfig& config, const FilterBank& initial,
                           LossBreakdown* breakdown) {
  initial.validate();
  const ImaglsObjective objective(problem, config);
  RealVector x0 = objective.pack(initial);

  // Breakdowns of the trial points of the current line search, so the
  // accepted one can be logged without re-evaluating.
  std::vector<LossBreakdown> trials;
  LossBreakdown result_breakdown;
  const GradientObjective fn = [&](const RealVector& x, RealVector& g) {
    LossBreakdown lb = objective.evaluate(x, &g);
    const double total = lb.total;
    trials.push_back(std::move(lb));
    return total;
  };
  LbfgsOptions opts;
  opts.memory = config.lbfgs_memory;
  opts.max_iter = config.max_iter;
  opts.grad_tol = config.grad_tol;
  const auto on_iteration = [&](const LbfgsRecord& rec) {
    const auto it = std::find_if(trials.rbegin(), trials.rend(),
                                 [&](const LossBreakdown& lb) { return lb.total == rec.value; });
    LossRecord row{rec.iteration, rec.value, 0.0, 0.0, 0.0, rec.grad_norm, rec.step};
    if (it != trials.rend()) {
      row.mag_left = it->mag_left;
      row.mag_right = it->mag_right;
      row.ild = it->ild_term;
    }
    result_breakdown.history.push_back(row);
    trials.clear();
  };
  const LbfgsResult res = minimize_lbfgs(fn, x0, opts, on_iteration);

  FilterBank out = initial;
  out.kind = DesignKind::kImagls;
  objective.unpack(res.x, out);
  const LossBreakdown final_lb = objective.evaluate(res.x, nullptr);
  result_breakdown.total = final_lb.total;
  result_breakdown.mag_left = final_lb.mag_left;
  result_breakdown.mag_right = final_lb.mag_right;
  result_breakdown.ild_term = final_lb.ild_term;

  const auto& first = result_breakdown.history.front();
  std::string status = res.status == LbfgsStatus::kConverged        ? "converged"
                       : res.status == LbfgsStatus::kMaxIterations  ? "max_iterations"
                                                                    : "line_search_failed";
  out.metadata["design"] = "imagls";
  out.metadata["imagls"] = {
      {"lambda", config.lambda},
      {"smoothing_eps", config.smoothing_eps},
      {"max_iter", config.max_iter},
      {"grad_tol", config.grad_tol},
      {"lbfgs_memory", config.lbfgs_memory},
      {"init", imagls_init_name(config.init)},
      {"band_lo_hz", config.ild_spec.band_lo_hz},
      {"band_hi_hz", config.ild_spec.band_hi_hz},
      {"centers_hz", config.ild_spec.centers_hz},
      {"num_horizontal_directions", config.ild_spec.horizontal_directions.size()},
      {"magnitude_normalization", "weighted target power per bin"},
      {"magnitude_weighting", magnitude_weighting_name(config.magnitude_weighting)},
      {"status", status},
      {"warning", res.warning},
      {"iterations", res.iterations},
      {"evaluations", res.evaluations},
      {"initial_loss", {{"total", first.total}, {"mag_left", first.mag_left}, {"mag_right", first.mag_right}, {"ild", first.ild}}},
      {"final_loss",
       {{"total", final_lb.total}, {"mag_left", final_lb.mag_left}, {"mag_right", final_lb.mag_right}, {"ild", final_lb.ild_term}}},
  };
  if (config.apply_covariance_constraint) {
    out = apply_covariance_constraint(out, problem, config.ild_spec.band_lo_hz, config.ild_spec.band_hi_hz);
  }
  if (breakdown != nullptr) *breakdown = std::move(result_breakdown);
  return out;
}

FilterBank optimize_imagls(const DesignProblem& problem, const ImaglsConfig& config, LossBreakdown* breakdown) {
  FilterBank initial;
  switch (config.init) {
    case ImaglsInit::kMagls: {
      MaglsOptions opts = config.magls;
      opts.band_lo_hz = config.ild_spec.band_lo_hz;
      opts.band_hi_hz = config.ild_spec.band_hi_hz;
      initial = apply_covariance_constraint(magls_filters(problem, opts), problem, opts.band_lo_hz, opts.band_hi_hz);
      break;
    }
    case ImaglsInit::kMse:
      initial = mse_filters(problem);
      break;
    case ImaglsInit::kZeros:
      initial = mse_filters(problem);
      for (std::size_t f = 0; f < initial.num_bins(); ++f) {
        const double freq = initial.frequencies_hz[f];
        if (freq >= config.ild_spec.band_lo_hz && freq < config.ild_spec.band_hi_hz) initial.coeffs[f].setZero();
      }
      break;
  }
  return optimize_imagls(problem, config, initial, breakdown);
}

void write_history_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  out << "iter,total,mag_l,mag_r,ild,grad_norm,step\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << r.total << ',' << r.mag_left << ',' << r.mag_right << ',' << r.ild << ','
        << r.grad_norm << ',' << r.step << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace bsm
