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

#include "manifest.h"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "bsm/error.h"
#include "version.h"

namespace bsm::tools {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

Manifest::Manifest(std::string command, const ExperimentConfig& config) {
  ExperimentConfig recorded = config;
  recorded.output_directory.clear();
  doc_["tool"] = "bsm";
  doc_["version"] = kToolVersion;
  doc_["command"] = std::move(command);
  doc_["config_ini"] = recorded.to_ini();
  doc_["config"] = recorded.to_json();
  doc_["inputs"] = nlohmann::json::object();
  doc_["outputs"] = nlohmann::json::object();
  doc_["results"] = nlohmann::json::object();
}

void Manifest::add_input(const std::string& label, const std::filesystem::path& path) {
  doc_["inputs"][label] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

void Manifest::add_output(const std::filesystem::path& directory, const std::string& name) {
  doc_["outputs"][name] = sha256_file(directory / name);
}

void Manifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc_.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

ManifestRun read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("config_ini") || !doc["config_ini"].is_string() ||
      !doc.contains("command")) {
    throw Error(ErrorCode::kConfig, "manifest lacks command or config_ini");
  }
  ManifestRun run;
  run.command = doc["command"].get<std::string>();
  run.config = parse_config(doc["config_ini"].get<std::string>(), {});
  run.inputs = doc.value("inputs", nlohmann::json::object());
  for (const auto& [label, entry] : run.inputs.items()) {
    const std::string recorded = entry.value("sha256", "");
    const std::filesystem::path input = entry.value("path", "");
    if (sha256_file(input) != recorded) {
      throw Error(ErrorCode::kIo, "input '" + label + "' (" + input.string() + ") changed since the manifest was written");
    }
  }
  return run;
}

}  // namespace bsm::tools
