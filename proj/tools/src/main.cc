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

// bsm: design, evaluate and apply binaural signal matching filters.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "bsm/error.h"
#include "bsm/parallel.h"
#include "commands.h"
#include "config.h"
#include "version.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code_for(bsm::ErrorCode code) {
  switch (bsm::error_class(code)) {
    case bsm::ErrorClass::kConfig: return kExitConfig;
    case bsm::ErrorClass::kData: return kExitData;
    case bsm::ErrorClass::kNumerical: return kExitNumerical;
  }
  return kExitNumerical;
}

bsm::tools::ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? bsm::tools::ExperimentConfig{} : bsm::tools::load_config(path);
}

std::pair<double, double> parse_direction(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw bsm::Error(bsm::ErrorCode::kConfig, "--direction expects 'theta_deg,phi_deg', got '" + text + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binaural signal matching: filter design, evaluation and rendering", "bsm"};
  app.set_version_flag("--version", std::string(bsm::tools::kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  bool verbose = false;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");

  std::string config_path;
  std::string out;
  std::string manifest;
  std::optional<double> lambda;
  std::optional<double> crossover;
  std::string sweep;

  auto* design = app.add_subcommand("design", "Design MSE, MagLS and iMagLS filter banks");
  design->add_option("--config", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  design->add_option("--out", out, "Output directory");
  design->add_option("--lambda", lambda, "ILD weight of the iMagLS loss");
  design->add_option("--crossover-hz", crossover, "Crossover to the MSE bank at low frequencies");
  design->add_option("--lambda-sweep", sweep, "Comma-separated lambda values to sweep");
  design->add_option("--from-manifest", manifest, "Re-run the design recorded in a manifest")
      ->excludes("--config");

  std::string banks_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Write NMSE, magnitude and ILD error reports");
  evaluate->add_option("--config", config_path, "Experiment config (INI)")->check(CLI::ExistingFile);
  evaluate->add_option("--banks", banks_dir, "Directory holding mse/magls/imagls.bsmf");
  evaluate->add_option("--out", out, "Output directory");
  evaluate->add_option("--from-manifest", manifest, "Re-run the evaluation recorded in a manifest")
      ->excludes("--config");

  std::string filters, wav_in, format = "float32", fir_dump;
  int taps = 1024;
  auto* render = app.add_subcommand("render", "Render microphone signals to binaural audio");
  render->add_option("--filters", filters, "Filter bank (.bsmf) or FIR set (.bsmr)")
      ->required()
      ;
  render->add_option("--input", wav_in, "Multichannel microphone WAV")->required();
  render->add_option("--out", out, "Stereo output WAV")->required();
  render->add_option("--taps", taps, "FIR length when converting a bank");
  render->add_option("--format", format, "Output sample format: pcm16, pcm24 or float32");
  render->add_option("--dump-fir", fir_dump, "Also save the FIR set used");

  std::string direction;
  auto* simulate = app.add_subcommand("simulate", "Simulate array signals of a plane-wave source");
  simulate->add_option("--config", config_path, "Experiment config (geometry, taps)")->check(CLI::ExistingFile);
  simulate->add_option("--input", wav_in, "Mono source WAV")->required();
  simulate->add_option("--direction", direction, "Source direction 'theta_deg,phi_deg'")->required();
  simulate->add_option("--out", out, "Multichannel output WAV")->required();
  simulate->add_option("--format", format, "Output sample format: pcm16, pcm24 or float32");

  std::string eval_dir;
  auto* report = app.add_subcommand("report", "Bundle evaluation CSVs into one JSON document");
  report->add_option("--eval-dir", eval_dir, "Directory written by evaluate")->required();
  report->add_option("--out", out, "Output JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    bsm::set_default_threads(threads);
    bsm::tools::RunOptions options{out, verbose};
    if (design->parsed()) {
      if (!manifest.empty()) {
        bsm::tools::cmd_rerun(manifest, options);
        return kExitOk;
      }
      auto config = load_or_default(config_path);
      if (lambda) config.imagls.lambda = *lambda;
      if (crossover) config.crossover_hz = *crossover;
      if (!sweep.empty()) config.lambda_sweep = bsm::tools::parse_number_list("--lambda-sweep", sweep);
      config.validate();
      if (options.out.empty()) options.out = config.output_directory;
      bsm::tools::cmd_design(config, options);
    } else if (evaluate->parsed()) {
      if (!manifest.empty()) {
        bsm::tools::cmd_rerun(manifest, options);
        return kExitOk;
      }
      if (banks_dir.empty()) throw bsm::Error(bsm::ErrorCode::kConfig, "evaluate needs --banks");
      auto config = load_or_default(config_path);
      if (options.out.empty()) options.out = config.output_directory;
      bsm::tools::cmd_evaluate(config, banks_dir, options);
    } else if (render->parsed()) {
      bsm::tools::cmd_render(filters, wav_in, out, taps, format,
                             fir_dump.empty() ? std::nullopt : std::optional<std::filesystem::path>(fir_dump),
                             verbose);
    } else if (simulate->parsed()) {
      const auto [theta, phi] = parse_direction(direction);
      bsm::tools::cmd_simulate(load_or_default(config_path), theta, phi, wav_in, out, format, verbose);
    } else if (report->parsed()) {
      bsm::tools::cmd_report(eval_dir, out, verbose);
    }
  } catch (const bsm::Error& e) {
    std::cerr << "bsm: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "bsm: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "bsm: internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
