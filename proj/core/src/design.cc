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

#include "bsm/design.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "bsm/error.h"
#include "bsm/parallel.h"

namespace bsm {
namespace {

// Factorization of V W V^H + r I for one bin.
class RegularizedSolver {
 public:
  RegularizedSolver(const ComplexMatrix& steering, std::span<const double> weights,
                    double noise_to_signal, std::size_t bin) {
    const Eigen::Map<const RealVector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    weighted_ = steering * w.cast<Complex>().asDiagonal();
    ComplexMatrix gram = weighted_ * steering.adjoint();
    const auto M = gram.rows();
    gram.diagonal().array() += noise_to_signal;
    const double scale = gram.diagonal().real().sum() / static_cast<double>(M);
    if (try_factor(gram) && (noise_to_signal > 0.0 || well_conditioned())) return;
    if (noise_to_signal == 0.0) {
      throw Error(ErrorCode::kSingularSystem,
                  "bin " + std::to_string(bin) + ": normal equations singular without regularization");
    }
    for (double eps : {1e-12, 1e-10, 1e-8}) {
      ComplexMatrix loaded = gram;
      loaded.diagonal().array() += eps * scale;
      if (try_factor(loaded)) {
        loading_ = eps * scale;
        return;
      }
    }
    throw Error(ErrorCode::kSingularSystem, "bin " + std::to_string(bin) + ": factorization failed after loading");
  }

  // (V W V^H + r I)^-1 V W
  ComplexMatrix projector() const { return llt_.solve(weighted_); }
  ComplexMatrix solve_targets(const ComplexMatrix& targets) const { return llt_.solve(weighted_ * targets); }
  double loading() const { return loading_; }

 private:
  bool try_factor(const ComplexMatrix& m) {
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) return false;
    const auto d = llt_.matrixLLT().diagonal().real();
    return d.allFinite() && d.minCoeff() > 0.0;
  }
  bool well_conditioned() const {
    const auto d = llt_.matrixLLT().diagonal().real().array().square();
    return d.minCoeff() > 1e-13 * d.maxCoeff();
  }

  ComplexMatrix weighted_;
  Eigen::LLT<ComplexMatrix> llt_;
  double loading_ = 0.0;
};

ComplexMatrix conj_targets(const ComplexMatrix& target) { return target.conjugate(); }

bool in_band(double f, double lo, double hi) { return f >= lo && f < hi; }

}  // namespace

void DesignProblem::validate() const {
  const std::size_t F = frequencies_hz.size();
  if (F == 0) throw Error(ErrorCode::kDimensionMismatch, "design problem has no bins");
  if (steering.size() != F || target.size() != F) {
    throw Error(ErrorCode::kDimensionMismatch, "per-bin arrays do not match the frequency count");
  }
  const auto M = steering.front().rows();
  const auto K = static_cast<Eigen::Index>(weights.size());
  if (M == 0 || K == 0) throw Error(ErrorCode::kDimensionMismatch, "empty steering matrices");
  for (std::size_t f = 0; f < F; ++f) {
    if (steering[f].rows() != M || steering[f].cols() != K || target[f].rows() != K || target[f].cols() != 2) {
      throw Error(ErrorCode::kDimensionMismatch, "bin " + std::to_string(f) + " has inconsistent dimensions");
    }
  }
  if (!(std::isfinite(noise_to_signal) && noise_to_signal >= 0.0)) {
    throw Error(ErrorCode::kConfig, "noise_to_signal must be finite and >= 0");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kBadWeights, "negative or NaN weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kBadWeights, "weights must sum to 1");
  if (!horizontal.empty()) {
    const auto L = static_cast<Eigen::Index>(horizontal.directions.size());
    if (horizontal.steering.size() != F || horizontal.target.size() != F) {
      throw Error(ErrorCode::kDimensionMismatch, "horizontal data does not match the frequency count");
    }
    for (std::size_t f = 0; f < F; ++f) {
      if (horizontal.steering[f].rows() != M || horizontal.steering[f].cols() != L ||
          horizontal.target[f].rows() != L || horizontal.target[f].cols() != 2) {
        throw Error(ErrorCode::kDimensionMismatch, "horizontal bin " + std::to_string(f) + " inconsistent");
      }
    }
  }
}

DesignProblem make_design_problem(const ArrayGeometry& geometry, const HrtfSet& hrtf,
                                  double noise_to_signal, const HrtfSet* horizontal) {
  geometry.validate();
  hrtf.validate();
  DesignProblem p;
  p.frequencies_hz = hrtf.frequencies_hz;
  p.weights = hrtf.grid.weights;
  p.noise_to_signal = noise_to_signal;
  const std::size_t F = p.frequencies_hz.size();
  p.steering.resize(F);
  p.target.resize(F);
  if (horizontal != nullptr) {
    horizontal->validate();
    if (horizontal->frequencies_hz != hrtf.frequencies_hz) {
      throw Error(ErrorCode::kGridMismatch, "horizontal set uses a different frequency grid");
    }
    p.horizontal.directions = horizontal->grid.directions;
    p.horizontal.steering.resize(F);
    p.horizontal.target.resize(F);
  }
  parallel_for(F, [&](std::size_t f) {
    const double freq = p.frequencies_hz[f];
    p.steering[f] = steering_matrix(geometry, freq, hrtf.grid.directions).entries;
    p.target[f].resize(static_cast<Eigen::Index>(hrtf.num_directions()), 2);
    p.target[f].col(0) = hrtf.left.col(f);
    p.target[f].col(1) = hrtf.right.col(f);
    if (horizontal != nullptr) {
      p.horizontal.steering[f] = steering_matrix(geometry, freq, horizontal->grid.directions).entries;
      p.horizontal.target[f].resize(static_cast<Eigen::Index>(horizontal->num_directions()), 2);
      p.horizontal.target[f].col(0) = horizontal->left.col(f);
      p.horizontal.target[f].col(1) = horizontal->right.col(f);
    }
  });
  p.validate();
  return p;
}

std::string_view design_kind_name(DesignKind kind) {
  switch (kind) {
    case DesignKind::kMse: return "mse";
    case DesignKind::kMagls: return "magls";
    case DesignKind::kImagls: return "imagls";
  }
  return "unknown";
}

DesignKind parse_design_kind(std::string_view name) {
  if (name == "mse") return DesignKind::kMse;
  if (name == "magls") return DesignKind::kMagls;
  if (name == "imagls") return DesignKind::kImagls;
  throw Error(ErrorCode::kUnsupportedFormat, "unknown design kind '" + std::string(name) + "'");
}

void FilterBank::validate() const {
  const std::size_t F = frequencies_hz.size();
  if (F == 0 || coeffs.size() != F) throw Error(ErrorCode::kDimensionMismatch, "filter bank bins inconsistent");
  const auto M = coeffs.front().rows();
  if (M == 0) throw Error(ErrorCode::kDimensionMismatch, "filter bank has no microphones");
  for (std::size_t f = 0; f < F; ++f) {
    if (coeffs[f].rows() != M || coeffs[f].cols() != 2) {
      throw Error(ErrorCode::kDimensionMismatch, "filter bank bin " + std::to_string(f) + " is not M x 2");
    }
    if (!coeffs[f].allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite filter coefficient");
    if (!std::isfinite(frequencies_hz[f])) throw Error(ErrorCode::kNonFinite, "non-finite frequency");
    if (f > 0 && !(frequencies_hz[f] > frequencies_hz[f - 1])) {
      throw Error(ErrorCode::kNonMonotoneFrequencies, "filter bank frequencies not increasing");
    }
  }
  if (!(crossover_hz >= frequencies_hz.front() && crossover_hz <= frequencies_hz.back())) {
    throw Error(ErrorCode::kDimensionMismatch, "crossover outside the bank's frequency range");
  }
}

FilterBank mse_filters(const DesignProblem& problem) {
  problem.validate();
  FilterBank bank;
  bank.kind = DesignKind::kMse;
  bank.frequencies_hz = problem.frequencies_hz;
  bank.crossover_hz = problem.frequencies_hz.front();
  bank.coeffs.resize(problem.num_bins());
  std::vector<double> loading(problem.num_bins(), 0.0);
  parallel_for(problem.num_bins(), [&](std::size_t f) {
    RegularizedSolver solver(problem.steering[f], problem.weights, problem.noise_to_signal, f);
    bank.coeffs[f] = solver.solve_targets(conj_targets(problem.target[f]));
    loading[f] = solver.loading();
  });
  bank.metadata["design"] = "mse";
  bank.metadata["noise_to_signal"] = problem.noise_to_signal;
  bank.metadata["diagonal_loading"] = loading;
  return bank;
}

double magnitude_loss(const ComplexMatrix& steering, const ComplexMatrix& target,
                      std::span<const double> weights, const ComplexMatrix& coeffs, int ear) {
  const ComplexVector y = steering.adjoint() * coeffs.col(ear);
  double num = 0.0, den = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double a = std::abs(target(k, ear));
    const double d = a - std::abs(y(k));
    num += weights[k] * d * d;
    den += weights[k] * a * a;
  }
  if (!(den > 0.0)) throw Error(ErrorCode::kDegeneratePower, "zero target power");
  return num / den;
}

std::string_view magls_phase_init_name(MaglsPhaseInit init) {
  switch (init) {
    case MaglsPhaseInit::kConstant: return "constant";
    case MaglsPhaseInit::kPreviousBin: return "previous_bin";
  }
  return "unknown";
}

MaglsPhaseInit parse_magls_phase_init(std::string_view name) {
  if (name == "constant") return MaglsPhaseInit::kConstant;
  if (name == "previous_bin") return MaglsPhaseInit::kPreviousBin;
  throw Error(ErrorCode::kConfig, "unknown MagLS phase init '" + std::string(name) + "' (constant, previous_bin)");
}

FilterBank magls_filters(const DesignProblem& problem, const MaglsOptions& options,
                         std::vector<MaglsBinReport>* reports) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::kConfig, "MagLS tolerance must be > 0");
  if (options.max_iter < 1) throw Error(ErrorCode::kConfig, "MagLS max_iter must be >= 1");
  FilterBank bank = mse_filters(problem);
  bank.kind = DesignKind::kMagls;
  const std::size_t F = problem.num_bins();
  const auto K = static_cast<Eigen::Index>(problem.num_directions());
  const double r = problem.noise_to_signal;
  std::vector<MaglsBinReport> local(F);
  const Complex init_phasor = std::polar(1.0, options.init_phase_rad);
  const bool continuation = options.phase_init == MaglsPhaseInit::kPreviousBin;

  auto solve_bin = [&](std::size_t f) {
    MaglsBinReport& rep = local[f];
    rep.bin = f;
    if (!in_band(problem.frequencies_hz[f], options.band_lo_hz, options.band_hi_hz)) return;
    const ComplexMatrix& V = problem.steering[f];
    const RegularizedSolver solver(V, problem.weights, r, f);
    const ComplexMatrix projector = solver.projector();  // M x K
    const RealMatrix amp = problem.target[f].cwiseAbs();  // K x 2
    const double reg = r + solver.loading();

    auto loss_of = [&](const ComplexMatrix& C, const ComplexMatrix& Y) {
      double acc = 0.0;
      for (int e = 0; e < 2; ++e) {
        for (Eigen::Index k = 0; k < K; ++k) {
          const double d = amp(k, e) - std::abs(Y(k, e));
          acc += problem.weights[k] * d * d;
        }
      }
      return acc + reg * C.squaredNorm();
    };

    ComplexMatrix phasor = ComplexMatrix::Constant(K, 2, init_phasor);
    if (continuation && f > 0) {
      // bank.coeffs[f - 1] is final: bins run in order in this mode.
      const ComplexMatrix previous = V.adjoint() * bank.coeffs[f - 1];
      for (Eigen::Index i = 0; i < previous.size(); ++i) {
        const double m = std::abs(previous(i));
        if (m > 0.0) phasor(i) = previous(i) / m;
      }
    }
    ComplexMatrix C = projector * (amp.cast<Complex>().cwiseProduct(phasor));
    ComplexMatrix Y = V.adjoint() * C;
    double loss = loss_of(C, Y);
    rep.iterations = 1;
    if (options.record_history) rep.history.push_back(loss);

    while (rep.iterations < options.max_iter) {
      for (Eigen::Index e = 0; e < 2; ++e) {
        for (Eigen::Index k = 0; k < K; ++k) {
          const double m = std::abs(Y(k, e));
          if (m > 0.0) phasor(k, e) = Y(k, e) / m;
        }
      }
      ComplexMatrix C_next = projector * (amp.cast<Complex>().cwiseProduct(phasor));
      ComplexMatrix Y_next = V.adjoint() * C_next;
      const double next_loss = loss_of(C_next, Y_next);
      ++rep.iterations;
      // Exchange steps cannot increase the loss; a rise is rounding noise at
      // the fixed point, so keep the previous iterate.
      if (next_loss > loss) break;
      const double decrease = loss - next_loss;
      C = std::move(C_next);
      Y = std::move(Y_next);
      loss = next_loss;
      if (options.record_history) rep.history.push_back(loss);
      const double threshold = options.relative_tol ? options.tol * loss : options.tol;
      if (decrease < threshold) break;
    }
    bank.coeffs[f] = C;
    rep.final_loss = loss;
    rep.magnitude_loss = 0.5 * (magnitude_loss(V, problem.target[f], problem.weights, C, 0) +
                                magnitude_loss(V, problem.target[f], problem.weights, C, 1));
  };
  if (continuation) {
    for (std::size_t f = 0; f < F; ++f) solve_bin(f);
  } else {
    parallel_for(F, solve_bin);
  }

  nlohmann::json iterations = nlohmann::json::array();
  nlohmann::json losses = nlohmann::json::array();
  for (const auto& rep : local) {
    iterations.push_back(rep.iterations);
    losses.push_back(rep.final_loss);
  }
  bank.metadata["design"] = "magls";
  bank.metadata["magls"] = {
      {"init_phase_rad", options.init_phase_rad},
      {"phase_init", magls_phase_init_name(options.phase_init)},
      {"tol", options.tol},
      {"max_iter", options.max_iter},
      {"relative_tol", options.relative_tol},
      {"band_lo_hz", options.band_lo_hz},
      {"band_hi_hz", std::min(options.band_hi_hz, 1e300)},
      {"iterations", iterations},
      {"final_loss", losses},
  };
  if (reports != nullptr) *reports = std::move(local);
  return bank;
}

Eigen::Matrix2cd rendered_covariance(const ComplexMatrix& steering, std::span<const double> weights,
                                     const ComplexMatrix& coeffs) {
  const ComplexMatrix Y = steering.adjoint() * coeffs;
  const Eigen::Map<const RealVector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return Y.adjoint() * w.cast<Complex>().asDiagonal() * Y;
}

Eigen::Matrix2cd target_covariance(const ComplexMatrix& target, std::span<const double> weights) {
  const ComplexMatrix T = target.conjugate();
  const Eigen::Map<const RealVector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return T.adjoint() * w.cast<Complex>().asDiagonal() * T;
}

FilterBank apply_covariance_constraint(const FilterBank& bank, const DesignProblem& problem,
                                       double band_lo_hz, double band_hi_hz) {
  bank.validate();
  problem.validate();
  if (bank.frequencies_hz != problem.frequencies_hz || bank.num_mics() != problem.num_mics()) {
    throw Error(ErrorCode::kGridMismatch, "bank and problem grids differ");
  }
  FilterBank out = bank;
  const std::size_t F = bank.num_bins();
  std::vector<double> loading(F, 0.0);
  std::vector<int> skipped(F, 0);
  parallel_for(F, [&](std::size_t f) {
    if (!in_band(bank.frequencies_hz[f], band_lo_hz, band_hi_hz)) return;
    const Eigen::Matrix2cd target = target_covariance(problem.target[f], problem.weights);
    Eigen::Matrix2cd rendered = rendered_covariance(problem.steering[f], problem.weights, bank.coeffs[f]);
    Eigen::LLT<Eigen::Matrix2cd> target_llt(target);
    if (target_llt.info() != Eigen::Success || target_llt.matrixLLT().diagonal().real().minCoeff() <= 0.0) {
      skipped[f] = 1;
      return;
    }
    Eigen::LLT<Eigen::Matrix2cd> rendered_llt(rendered);
    const auto rank_ok = [&] {
      const auto d = rendered_llt.matrixLLT().diagonal().real().array().square();
      return rendered_llt.info() == Eigen::Success && d.minCoeff() > 1e-14 * d.maxCoeff();
    };
    if (!rank_ok()) {
      loading[f] = 1e-10 * rendered.trace().real() / 2.0;
      if (!(loading[f] > 0.0)) {
        skipped[f] = 1;
        return;
      }
      rendered.diagonal().array() += loading[f];
      rendered_llt.compute(rendered);
    }
    const Eigen::Matrix2cd Le = rendered_llt.matrixL();
    const Eigen::Matrix2cd Lt = target_llt.matrixL();
    // X = Le^-H Lt^H
    const Eigen::Matrix2cd X = Le.adjoint().triangularView<Eigen::Upper>().solve(Lt.adjoint());
    out.coeffs[f] = bank.coeffs[f] * X;
  });
  nlohmann::json skipped_bins = nlohmann::json::array();
  for (std::size_t f = 0; f < F; ++f) {
    if (skipped[f]) skipped_bins.push_back(f);
  }
  out.metadata["covariance_constraint"] = {
      {"applied", true},
      {"band_lo_hz", band_lo_hz},
      {"band_hi_hz", std::min(band_hi_hz, 1e300)},
      {"diagonal_loading", loading},
      {"skipped_bins", skipped_bins},
  };
  return out;
}

}  // namespace bsm
