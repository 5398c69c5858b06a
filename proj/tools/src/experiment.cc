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

#include "experiment.h"

#include "bsm/error.h"
#include "bsm/hrtf.h"

namespace bsm::tools {

Experiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  Experiment ex;
  ex.config = config;
  ex.geometry = resolve_geometry(config);
  if (!config.geometry.starts_with("builtin:")) ex.inputs.emplace_back("geometry", config.geometry);

  HrtfSet hrtf;
  HrtfSet horizontal;
  if (config.hrtf == "synthetic") {
    const auto grid = gauss_product_grid(config.grid_theta, config.grid_phi);
    const auto freqs = dft_frequency_grid(config.sample_rate_hz, config.dft_size);
    SyntheticHead head;
    head.radius_m = config.head_radius_m;
    hrtf = synthetic_sphere_hrtf(head, grid, freqs, config.sample_rate_hz);
    horizontal = synthetic_sphere_hrtf(head, horizontal_ring(config.horizontal_count), freqs, config.sample_rate_hz);
    ex.description["hrtf"] = "synthetic rigid sphere";
  } else {
    hrtf = load_native(config.hrtf);
    ex.inputs.emplace_back("hrtf", config.hrtf);
    const auto subset = horizontal_subset(hrtf, config.horizontal_tolerance_deg);
    horizontal = select_directions(hrtf, subset.indices);
    ex.description["hrtf"] = config.hrtf;
  }
  ex.sample_rate_hz = hrtf.sample_rate_hz;
  ex.problem = make_design_problem(ex.geometry, hrtf, config.noise_to_signal, &horizontal);
  ex.ild_spec = make_ild_spec(config.band_lo_hz, config.band_hi_hz, config.erb_step, horizontal.grid.directions);
  ex.description["num_directions"] = hrtf.num_directions();
  ex.description["num_horizontal_directions"] = horizontal.num_directions();
  ex.description["num_bins"] = hrtf.num_frequencies();
  ex.description["num_mics"] = ex.geometry.mic_directions.size();
  ex.description["sample_rate_hz"] = ex.sample_rate_hz;
  ex.description["ild_centers_hz"] = ex.ild_spec.centers_hz;
  return ex;
}

MaglsOptions magls_options(const Experiment& experiment) {
  MaglsOptions opts = experiment.config.magls;
  opts.band_lo_hz = experiment.config.band_lo_hz;
  opts.band_hi_hz = experiment.config.band_hi_hz;
  return opts;
}

ImaglsConfig imagls_config(const Experiment& experiment, double lambda) {
  ImaglsConfig cfg = experiment.config.imagls;
  cfg.lambda = lambda;
  cfg.ild_spec = experiment.ild_spec;
  cfg.magls = magls_options(experiment);
  return cfg;
}

MethodSummary summarize(const EvalReport& report, const MethodCurves& curves) {
  MethodSummary s;
  s.name = curves.name;
  s.mean_ild_error_db = mean_ild_error_db(curves);
  s.mag_error_low_band_db = mean_in_band(curves.mag_error_db, report.frequencies_hz, kLowBandLoHz, kLowBandHiHz);
  s.mean_mag_error_db = curves.mag_error_db.mean();
  s.mean_nmse_db = curves.nmse_db.mean();
  s.frontal_ild_error_db = mean_ild_error_in_angles(report, curves, kFrontalLoDeg, kFrontalHiDeg);
  s.rear_ild_error_db = mean_ild_error_in_angles(report, curves, kRearLoDeg, kRearHiDeg);
  return s;
}

nlohmann::json to_json(const MethodSummary& s) {
  return {
      {"mean_ild_error_db", s.mean_ild_error_db},
      {"mag_error_1500_5000hz_db", s.mag_error_low_band_db},
      {"mean_mag_error_db", s.mean_mag_error_db},
      {"mean_nmse_db", s.mean_nmse_db},
      {"frontal_ild_error_db", s.frontal_ild_error_db},
      {"rear_ild_error_db", s.rear_ild_error_db},
  };
}

nlohmann::json compare(const MethodSummary& baseline, const MethodSummary& candidate, bool measured_hrtf) {
  const double improvement = baseline.mean_ild_error_db - candidate.mean_ild_error_db;
  const double frontal = baseline.frontal_ild_error_db - candidate.frontal_ild_error_db;
  const double rear = baseline.rear_ild_error_db - candidate.rear_ild_error_db;
  nlohmann::json out = {
      {"baseline", baseline.name},
      {"candidate", candidate.name},
      {"ild_improvement_db", improvement},
      {"mag_error_1500_5000hz_degradation_db", candidate.mag_error_low_band_db - baseline.mag_error_low_band_db},
      {"candidate_mag_error_1500_5000hz_below_minus_10db", candidate.mag_error_low_band_db < -10.0},
      {"frontal_ild_improvement_db", frontal},
      {"rear_ild_improvement_db", rear},
      {"frontal_improvement_exceeds_rear", frontal > rear},
      {"reference_ild_improvement_db", kReferenceIldImprovementDb},
      {"reference_tolerance_db", kReferenceIldToleranceDb},
  };
  if (measured_hrtf) {
    out["within_reference_band"] = std::abs(improvement - kReferenceIldImprovementDb) <= kReferenceIldToleranceDb;
  } else {
    out["within_reference_band"] = nullptr;
    out["reference_band_note"] = "reference applies to measured HRTFs; synthetic surrogate in use";
  }
  return out;
}

}  // namespace bsm::tools
