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

#ifndef BSM_TOOLS_MANIFEST_H_
#define BSM_TOOLS_MANIFEST_H_

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "config.h"

namespace bsm::tools {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

// Run record: tool version, the canonical config, and SHA-256 digests of
// every input and output. Holds no timestamps or host data, so identical
// runs produce identical manifests.
class Manifest {
 public:
  Manifest(std::string command, const ExperimentConfig& config);

  void add_input(const std::string& label, const std::filesystem::path& path);
  // Records `directory / name` under `name`.
  void add_output(const std::filesystem::path& directory, const std::string& name);
  nlohmann::json& results() { return doc_["results"]; }
  void write(const std::filesystem::path& path) const;

 private:
  nlohmann::json doc_;
};

struct ManifestRun {
  std::string command;
  ExperimentConfig config;
  nlohmann::json inputs;  // label -> {path, sha256}
};

// Reads a manifest and checks that the recorded inputs still hash to the
// recorded digests.
ManifestRun read_manifest(const std::filesystem::path& path);

}  // namespace bsm::tools

#endif  // BSM_TOOLS_MANIFEST_H_
