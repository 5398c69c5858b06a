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

#include <cmath>
#include <string>

#include "binary_io.h"
#include "bsm/design.h"
#include "bsm/error.h"

namespace bsm {
namespace {

constexpr char kMagic[] = "BSMF";

}  // namespace

std::vector<std::uint8_t> encode_filter_bank(const FilterBank& bank) {
  bank.validate();
  internal::ByteWriter w;
  w.magic(kMagic);
  w.u32(kFilterBankVersion);
  w.u32(static_cast<std::uint32_t>(bank.num_bins()));
  w.u32(static_cast<std::uint32_t>(bank.num_mics()));
  w.f64(bank.crossover_hz);
  for (double f : bank.frequencies_hz) w.f64(f);
  for (const auto& c : bank.coeffs) {
    for (Eigen::Index m = 0; m < c.rows(); ++m) {
      for (Eigen::Index e = 0; e < 2; ++e) {
        w.f64(c(m, e).real());
        w.f64(c(m, e).imag());
      }
    }
  }
  nlohmann::json meta = bank.metadata;
  meta["kind"] = design_kind_name(bank.kind);
  w.text(meta.dump());
  return w.take();
}

FilterBank decode_filter_bank(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::kTruncated, "file shorter than magic");
  internal::ByteReader r(bytes);
  if (!r.magic(kMagic)) throw Error(ErrorCode::kBadMagic, "not a BSMF container");
  const std::uint32_t version = r.u32();
  if (version != kFilterBankVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported BSMF version " + std::to_string(version));
  }
  const std::uint32_t F = r.u32();
  const std::uint32_t M = r.u32();
  if (F == 0 || M == 0) throw Error(ErrorCode::kDimensionMismatch, "F and M must be positive");
  const std::uint64_t payload = 8ULL + 8ULL * F + 32ULL * F * M + 4ULL;
  if (r.remaining() < payload) throw Error(ErrorCode::kTruncated, "payload shorter than declared F, M");
  FilterBank bank;
  bank.crossover_hz = r.f64();
  bank.frequencies_hz.resize(F);
  for (auto& f : bank.frequencies_hz) f = r.f64();
  bank.coeffs.resize(F);
  for (auto& c : bank.coeffs) {
    c.resize(M, 2);
    for (Eigen::Index m = 0; m < M; ++m) {
      for (Eigen::Index e = 0; e < 2; ++e) {
        const double re = r.f64();
        const double im = r.f64();
        c(m, e) = {re, im};
      }
    }
  }
  const std::string meta = r.text();
  if (r.remaining() != 0) throw Error(ErrorCode::kDimensionMismatch, "trailing bytes after metadata");
  try {
    bank.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kUnsupportedFormat, std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!bank.metadata.is_object() || !bank.metadata.contains("kind") || !bank.metadata["kind"].is_string()) {
    throw Error(ErrorCode::kUnsupportedFormat, "metadata lacks a kind tag");
  }
  const std::string kind = bank.metadata["kind"].get<std::string>();
  if (kind == "fir") throw Error(ErrorCode::kUnsupportedFormat, "container holds FIR taps, not a filter bank");
  bank.kind = parse_design_kind(kind);
  bank.metadata.erase("kind");
  bank.validate();
  return bank;
}

void save_filter_bank(const FilterBank& bank, const std::filesystem::path& path) {
  internal::write_file(path, encode_filter_bank(bank));
}

FilterBank load_filter_bank(const std::filesystem::path& path) {
  return decode_filter_bank(internal::read_file(path));
}

}  // namespace bsm
