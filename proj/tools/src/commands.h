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

#ifndef BSM_TOOLS_COMMANDS_H_
#define BSM_TOOLS_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <string>

#include "config.h"

namespace bsm::tools {

struct RunOptions {
  std::filesystem::path out;
  bool verbose = false;
};

// Writes mse/magls/imagls banks (and crossover-merged *_xover banks), the
// per-bin MagLS report, the iMagLS loss history and manifest_design.json.
// With a lambda sweep, one bank per lambda plus sweep.csv; the selected
// lambda's bank becomes imagls.bsmf.
void cmd_design(const ExperimentConfig& config, const RunOptions& options);

// Evaluates the banks in `banks_dir` (mse/magls/imagls.bsmf, whichever
// exist) and writes the four CSV reports, summary.json and
// manifest_evaluate.json.
void cmd_evaluate(const ExperimentConfig& config, const std::filesystem::path& banks_dir, const RunOptions& options);

// Renders a multichannel WAV through a bank (converted to FIR taps) or a
// saved FIR set. Optionally dumps the FIR set.
void cmd_render(const std::filesystem::path& filters, const std::filesystem::path& wav_in,
                const std::filesystem::path& wav_out, int taps, const std::string& sample_format,
                const std::optional<std::filesystem::path>& fir_dump, bool verbose);

// Simulates the array's microphone signals for a mono source at a direction.
void cmd_simulate(const ExperimentConfig& config, double theta_deg, double phi_deg,
                  const std::filesystem::path& wav_in, const std::filesystem::path& wav_out,
                  const std::string& sample_format, bool verbose);

// Bundles the evaluation CSVs and summary of `eval_dir` into report.json.
void cmd_report(const std::filesystem::path& eval_dir, const std::filesystem::path& out_file, bool verbose);

// Re-runs the command recorded in a manifest into `out`.
void cmd_rerun(const std::filesystem::path& manifest, const RunOptions& options);

}  // namespace bsm::tools

#endif  // BSM_TOOLS_COMMANDS_H_
