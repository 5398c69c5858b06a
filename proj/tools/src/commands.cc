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

#include "commands.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bsm/error.h"
#include "bsm/render.h"
#include "bsm/wav.h"
#include "experiment.h"
#include "manifest.h"
#include "version.h"

namespace bsm::tools {
namespace {

namespace fs = std::filesystem;

class Progress {
 public:
  explicit Progress(bool verbose) : verbose_(verbose), start_(std::chrono::steady_clock::now()) {}
  void operator()(const std::string& message) const {
    if (!verbose_) return;
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ostringstream line;
    line.precision(1);
    line << std::fixed << "[" << t << " s] " << message << '\n';
    std::cerr << line.str();
  }

 private:
  bool verbose_;
  std::chrono::steady_clock::time_point start_;
};

fs::path prepare_out(const fs::path& out) {
  if (out.empty()) throw Error(ErrorCode::kConfig, "no output directory (use --out or [output] directory)");
  fs::create_directories(out);
  return out;
}

std::string bank_file(DesignKind kind) { return std::string(design_kind_name(kind)) + ".bsmf"; }

bool contains(const std::vector<DesignKind>& kinds, DesignKind kind) {
  return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

void write_magls_report(const std::vector<MaglsBinReport>& reports, const DesignProblem& problem,
                        const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  out << "bin,freq_hz,iterations,final_loss,magnitude_loss\n";
  for (const auto& r : reports) {
    out << r.bin << ',' << problem.frequencies_hz[r.bin] << ',' << r.iterations << ',' << r.final_loss << ','
        << r.magnitude_loss << '\n';
  }
}

struct SweepRow {
  double lambda = 0.0;
  std::string file;
  MethodSummary summary;
  double improvement_db = 0.0;
  double degradation_db = 0.0;
  bool feasible = false;
  std::string status;
  int iterations = 0;
};

std::string sweep_file(std::size_t index) { return "imagls_sweep_" + std::to_string(index) + ".bsmf"; }

}  // namespace

void cmd_design(const ExperimentConfig& config, const RunOptions& options) {
  const Progress progress(options.verbose);
  const fs::path out = prepare_out(options.out);
  progress("preparing design problem");
  const Experiment ex = prepare_experiment(config);
  progress("problem ready: " + ex.description.dump());
  Manifest manifest("design", config);
  for (const auto& [label, path] : ex.inputs) manifest.add_input(label, path);
  auto& results = manifest.results();
  results["experiment"] = ex.description;

  const bool want_magls = contains(config.methods, DesignKind::kMagls);
  const bool want_imagls = contains(config.methods, DesignKind::kImagls);
  if (want_imagls && ex.problem.horizontal.empty()) {
    throw Error(ErrorCode::kNoHorizontalDirections, "iMagLS requires horizontal-plane directions");
  }

  progress("MSE design");
  const FilterBank mse = mse_filters(ex.problem);
  std::vector<std::string> outputs;
  if (contains(config.methods, DesignKind::kMse)) {
    save_filter_bank(mse, out / bank_file(DesignKind::kMse));
    outputs.push_back(bank_file(DesignKind::kMse));
  }

  std::optional<FilterBank> magls_raw;
  std::optional<FilterBank> magls_bank;
  const bool magls_warm_start = want_imagls && config.imagls.init == ImaglsInit::kMagls;
  if (want_magls || magls_warm_start || !config.lambda_sweep.empty()) {
    progress("MagLS design");
    std::vector<MaglsBinReport> reports;
    magls_raw = magls_filters(ex.problem, magls_options(ex), &reports);
    write_magls_report(reports, ex.problem, out / "magls_bins.csv");
    outputs.push_back("magls_bins.csv");
    int max_iterations = 0;
    for (const auto& r : reports) max_iterations = std::max(max_iterations, r.iterations);
    results["magls"] = {{"max_bin_iterations", max_iterations}, {"bins", reports.size()}};
    magls_bank = config.magls_covariance_constraint
                     ? apply_covariance_constraint(*magls_raw, ex.problem, config.band_lo_hz, config.band_hi_hz)
                     : *magls_raw;
    if (want_magls) {
      save_filter_bank(*magls_bank, out / bank_file(DesignKind::kMagls));
      save_filter_bank(crossover_merge(mse, *magls_bank, config.crossover_hz), out / "magls_xover.bsmf");
      outputs.push_back(bank_file(DesignKind::kMagls));
      outputs.push_back("magls_xover.bsmf");
    }
  }

  if (want_imagls) {
    FilterBank initial;
    switch (config.imagls.init) {
      case ImaglsInit::kMagls:
        initial = config.magls_covariance_constraint
                      ? *magls_bank
                      : apply_covariance_constraint(*magls_raw, ex.problem, config.band_lo_hz, config.band_hi_hz);
        break;
      case ImaglsInit::kMse:
      case ImaglsInit::kZeros:
        initial = mse;
        if (config.imagls.init == ImaglsInit::kZeros) {
          for (std::size_t f = 0; f < initial.num_bins(); ++f) {
            const double freq = initial.frequencies_hz[f];
            if (freq >= config.band_lo_hz && freq < config.band_hi_hz) initial.coeffs[f].setZero();
          }
        }
        break;
    }

    FilterBank chosen;
    LossBreakdown chosen_loss;
    if (config.lambda_sweep.empty()) {
      progress("iMagLS design, lambda = " + format_number(config.imagls.lambda));
      chosen = optimize_imagls(ex.problem, imagls_config(ex, config.imagls.lambda), initial, &chosen_loss);
    } else {
      const std::array<NamedBank, 1> baseline_banks = {NamedBank{"magls", &*magls_bank}};
      const EvalReport baseline_report = ild_error_report(ex.problem, baseline_banks, ex.ild_spec);
      const MethodSummary baseline = summarize(baseline_report, baseline_report.methods.front());
      std::vector<SweepRow> rows;
      std::vector<LossBreakdown> losses;
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < config.lambda_sweep.size(); ++i) {
        const double lambda = config.lambda_sweep[i];
        progress("sweep " + std::to_string(i + 1) + "/" + std::to_string(config.lambda_sweep.size()) +
                 ": lambda = " + format_number(lambda));
        LossBreakdown loss;
        const FilterBank bank = optimize_imagls(ex.problem, imagls_config(ex, lambda), initial, &loss);
        save_filter_bank(bank, out / sweep_file(i));
        outputs.push_back(sweep_file(i));
        const std::array<NamedBank, 1> banks = {NamedBank{"imagls", &bank}};
        const EvalReport report = ild_error_report(ex.problem, banks, ex.ild_spec);
        SweepRow row;
        row.lambda = lambda;
        row.file = sweep_file(i);
        row.summary = summarize(report, report.methods.front());
        row.improvement_db = baseline.mean_ild_error_db - row.summary.mean_ild_error_db;
        row.degradation_db = row.summary.mag_error_low_band_db - baseline.mag_error_low_band_db;
        row.feasible = row.degradation_db <= config.sweep_max_degradation_db &&
                       row.summary.mag_error_low_band_db < config.sweep_max_magnitude_error_db;
        row.status = bank.metadata["imagls"].value("status", "");
        row.iterations = bank.metadata["imagls"].value("iterations", 0);
        rows.push_back(row);
        losses.push_back(std::move(loss));
        // Among feasible lambdas keep the lowest ILD error; without any
        // feasible lambda fall back to the smallest degradation.
        if (!best) {
          best = i;
        } else {
          const SweepRow& b = rows[*best];
          const bool better = row.feasible != b.feasible
                                  ? row.feasible
                                  : (row.feasible ? row.summary.mean_ild_error_db < b.summary.mean_ild_error_db
                                                  : row.degradation_db < b.degradation_db);
          if (better) best = i;
        }
      }
      std::ofstream csv(out / "sweep.csv");
      if (!csv) throw Error(ErrorCode::kIo, "cannot write sweep.csv");
      csv.precision(10);
      csv << "lambda,file,mean_ild_error_db,ild_improvement_db,mag_error_1500_5000hz_db,degradation_db,feasible,"
             "selected,iterations,status\n";
      nlohmann::json table = nlohmann::json::array();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv << format_number(r.lambda) << ',' << r.file << ',' << r.summary.mean_ild_error_db << ','
            << r.improvement_db << ',' << r.summary.mag_error_low_band_db << ',' << r.degradation_db << ','
            << (r.feasible ? 1 : 0) << ',' << (i == *best ? 1 : 0) << ',' << r.iterations << ',' << r.status
            << '\n';
        table.push_back({{"lambda", r.lambda},
                         {"file", r.file},
                         {"summary", to_json(r.summary)},
                         {"ild_improvement_db", r.improvement_db},
                         {"degradation_db", r.degradation_db},
                         {"feasible", r.feasible},
                         {"selected", i == *best},
                         {"iterations", r.iterations},
                         {"status", r.status}});
      }
      csv.close();
      outputs.push_back("sweep.csv");
      results["lambda_sweep"] = {{"baseline", to_json(baseline)},
                                 {"rows", table},
                                 {"selected_lambda", rows[*best].lambda},
                                 {"selected_feasible", rows[*best].feasible},
                                 {"max_degradation_db", config.sweep_max_degradation_db},
                                 {"max_magnitude_error_db", config.sweep_max_magnitude_error_db}};
      if (!rows[*best].feasible) {
        std::cerr << "warning: no lambda in the sweep met the magnitude constraints; using the least degrading\n";
      }
      chosen = load_filter_bank(out / rows[*best].file);
      chosen_loss = std::move(losses[*best]);
    }
    results["imagls"] = chosen.metadata["imagls"];
    save_filter_bank(chosen, out / bank_file(DesignKind::kImagls));
    save_filter_bank(crossover_merge(mse, chosen, config.crossover_hz), out / "imagls_xover.bsmf");
    write_history_csv(chosen_loss.history, out / "imagls_history.csv");
    outputs.push_back(bank_file(DesignKind::kImagls));
    outputs.push_back("imagls_xover.bsmf");
    outputs.push_back("imagls_history.csv");
  }

  for (const auto& name : outputs) manifest.add_output(out, name);
  manifest.write(out / "manifest_design.json");
  progress("design done");
}

void cmd_evaluate(const ExperimentConfig& config, const fs::path& banks_dir, const RunOptions& options) {
  const Progress progress(options.verbose);
  const fs::path out = prepare_out(options.out);
  std::vector<std::pair<std::string, FilterBank>> loaded;
  Manifest manifest("evaluate", config);
  for (const auto kind : {DesignKind::kMse, DesignKind::kMagls, DesignKind::kImagls}) {
    const fs::path path = banks_dir / bank_file(kind);
    if (!fs::exists(path)) continue;
    loaded.emplace_back(std::string(design_kind_name(kind)), load_filter_bank(path));
    manifest.add_input("bank:" + std::string(design_kind_name(kind)), fs::absolute(path).lexically_normal());
  }
  if (loaded.empty()) {
    throw Error(ErrorCode::kIo, "no mse.bsmf, magls.bsmf or imagls.bsmf in " + banks_dir.string());
  }
  progress("preparing evaluation problem");
  const Experiment ex = prepare_experiment(config);
  for (const auto& [label, path] : ex.inputs) manifest.add_input(label, path);
  std::vector<NamedBank> banks;
  for (const auto& [name, bank] : loaded) banks.push_back({name, &bank});
  progress("evaluating " + std::to_string(banks.size()) + " banks");
  const EvalReport report = ild_error_report(ex.problem, banks, ex.ild_spec);
  write_report_csvs(report, out);

  nlohmann::json summary = {{"experiment", ex.description}, {"methods", nlohmann::json::object()}};
  std::map<std::string, MethodSummary> by_name;
  for (const auto& m : report.methods) {
    by_name[m.name] = summarize(report, m);
    summary["methods"][m.name] = to_json(by_name[m.name]);
  }
  if (by_name.contains("magls") && by_name.contains("imagls")) {
    summary["imagls_vs_magls"] = compare(by_name["magls"], by_name["imagls"], config.hrtf != "synthetic");
  }
  {
    std::ofstream s(out / "summary.json");
    if (!s) throw Error(ErrorCode::kIo, "cannot write summary.json");
    s << summary.dump(2) << '\n';
  }
  manifest.results() = summary;
  for (const auto* name : {"nmse.csv", "magnitude.csv", "ild_vs_freq.csv", "ild_vs_angle.csv", "summary.json"}) {
    manifest.add_output(out, name);
  }
  manifest.write(out / "manifest_evaluate.json");
  progress("evaluation done");
}

void cmd_render(const fs::path& filters, const fs::path& wav_in, const fs::path& wav_out, int taps,
                const std::string& sample_format, const std::optional<fs::path>& fir_dump, bool verbose) {
  const Progress progress(verbose);
  const SampleFormat format = parse_sample_format(sample_format);
  const MultichannelAudio audio = read_wav(wav_in);
  FirSet fir;
  std::ifstream probe(filters, std::ios::binary);
  if (!probe) throw Error(ErrorCode::kIo, "cannot read " + filters.string());
  char magic[4] = {};
  probe.read(magic, 4);
  if (std::string_view(magic, 4) == "BSMR") {
    fir = load_fir(filters);
  } else {
    const FilterBank bank = load_filter_bank(filters);
    progress("converting bank to " + std::to_string(taps) + "-tap FIR");
    fir = filters_to_fir(bank, taps, audio.sample_rate_hz);
  }
  if (fir_dump) save_fir(fir, *fir_dump);
  progress("rendering " + std::to_string(audio.frames()) + " frames");
  write_wav(wav_out, render_binaural(audio, fir), audio.sample_rate_hz, format);
}

void cmd_simulate(const ExperimentConfig& config, double theta_deg, double phi_deg, const fs::path& wav_in,
                  const fs::path& wav_out, const std::string& sample_format, bool verbose) {
  const Progress progress(verbose);
  const SampleFormat format = parse_sample_format(sample_format);
  const MultichannelAudio source = read_wav(wav_in);
  if (source.channels() != 1) {
    throw Error(ErrorCode::kChannelMismatch, "source must be mono, got " + std::to_string(source.channels()));
  }
  const ArrayGeometry geometry = resolve_geometry(config);
  const Direction direction = Direction::from_degrees(theta_deg, phi_deg);
  std::vector<double> samples(static_cast<std::size_t>(source.frames()));
  for (Eigen::Index i = 0; i < source.frames(); ++i) samples[static_cast<std::size_t>(i)] = source.samples(0, i);
  progress("simulating " + std::to_string(geometry.mic_directions.size()) + " microphones");
  const MultichannelAudio mics =
      simulate_mic_signals(geometry, samples, direction, source.sample_rate_hz, config.taps, config.dft_size);
  write_wav(wav_out, mics, format);
}

void cmd_report(const fs::path& eval_dir, const fs::path& out_file, bool verbose) {
  const Progress progress(verbose);
  nlohmann::json bundle = {{"tool", "bsm"}, {"version", kToolVersion}, {"tables", nlohmann::json::object()}};
  for (const auto* name : {"nmse", "magnitude", "ild_vs_freq", "ild_vs_angle"}) {
    const fs::path path = eval_dir / (std::string(name) + ".csv");
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    nlohmann::json columns = nlohmann::json::array();
    {
      std::stringstream header(line);
      std::string cell;
      while (std::getline(header, cell, ',')) columns.push_back(cell);
    }
    nlohmann::json data = nlohmann::json::object();
    for (const auto& c : columns) data[c.get<std::string>()] = nlohmann::json::array();
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream row(line);
      std::string cell;
      std::size_t i = 0;
      while (std::getline(row, cell, ',')) {
        if (i >= columns.size()) throw Error(ErrorCode::kDimensionMismatch, path.string() + ": ragged row");
        try {
          data[columns[i].get<std::string>()].push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kNonFinite, path.string() + ": bad number '" + cell + "'");
        }
        ++i;
      }
      if (i != columns.size()) throw Error(ErrorCode::kDimensionMismatch, path.string() + ": ragged row");
      ++rows;
    }
    bundle["tables"][name] = {{"columns", columns}, {"rows", rows}, {"data", data}};
    progress("bundled " + path.string());
  }
  const fs::path summary_path = eval_dir / "summary.json";
  if (fs::exists(summary_path)) {
    std::ifstream in(summary_path);
    try {
      bundle["summary"] = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kUnsupportedFormat, "summary.json is not valid JSON: " + std::string(e.what()));
    }
  }
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  std::ofstream out(out_file);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + out_file.string());
  out << bundle.dump(2) << '\n';
}

void cmd_rerun(const fs::path& manifest_path, const RunOptions& options) {
  const ManifestRun run = read_manifest(manifest_path);
  if (run.command == "design") {
    cmd_design(run.config, options);
  } else if (run.command == "evaluate") {
    fs::path banks_dir;
    for (const auto& [label, entry] : run.inputs.items()) {
      if (label.starts_with("bank:")) banks_dir = fs::path(entry.value("path", "")).parent_path();
    }
    if (banks_dir.empty()) throw Error(ErrorCode::kConfig, "evaluate manifest lists no banks");
    cmd_evaluate(run.config, banks_dir, options);
  } else {
    throw Error(ErrorCode::kConfig, "manifest command '" + run.command + "' cannot be re-run");
  }
}

}  // namespace bsm::tools
