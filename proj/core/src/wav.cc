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

#include "bsm/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "binary_io.h"
#include "bsm/error.h"

namespace bsm {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

double decode_sample(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  switch (bits) {
    case 16:
      return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
  }
}

}  // namespace

SampleFormat parse_sample_format(std::string_view name) {
  if (name == "pcm16") return SampleFormat::kPcm16;
  if (name == "pcm24") return SampleFormat::kPcm24;
  if (name == "float32") return SampleFormat::kFloat32;
  throw Error(ErrorCode::kConfig, "unknown sample format '" + std::string(name) + "' (pcm16, pcm24, float32)");
}

MultichannelAudio read_wav(const std::filesystem::path& path) {
  const auto bytes = internal::read_file(path);
  const std::uint8_t* d = bytes.data();
  if (bytes.size() < 12 || std::memcmp(d, "RIFF", 4) != 0 || std::memcmp(d + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat, path.string() + " is not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(d + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (std::memcmp(d + pos, "data", 4) != 0) throw Error(ErrorCode::kTruncated, "WAV chunk exceeds file size");
    }
    if (std::memcmp(d + pos, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::kUnsupportedFormat, "fmt chunk too short");
      format = read_u16(d + body);
      channels = read_u16(d + body + 2);
      rate = read_u32(d + body + 4);
      bits = read_u16(d + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::kUnsupportedFormat, "extensible fmt chunk too short");
        format = read_u16(d + body + 24);
      }
    } else if (std::memcmp(d + pos, "data", 4) == 0) {
      data = d + body;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1U);
  }
  if (channels == 0 || data == nullptr) throw Error(ErrorCode::kUnsupportedFormat, "WAV lacks fmt or data chunk");
  const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) ||
                  (format == kFormatFloat && (bits == 32 || bits == 64));
  if (!ok) {
    throw Error(ErrorCode::kUnsupportedFormat,
                "unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
  const auto frames = static_cast<Eigen::Index>(data_size / frame_bytes);
  MultichannelAudio audio;
  audio.sample_rate_hz = rate;
  audio.samples.resize(channels, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      audio.samples(c, t) = decode_sample(data + t * frame_bytes + c * (bits / 8), format, bits);
    }
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const RealMatrix& samples, double sample_rate_hz,
               SampleFormat format) {
  if (samples.rows() == 0) throw Error(ErrorCode::kChannelMismatch, "no channels to write");
  if (!samples.allFinite()) throw Error(ErrorCode::kNonFinite, "audio contains NaN/inf");
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : format == SampleFormat::kPcm24 ? 24 : 32;
  const std::uint16_t tag = format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const auto channels = static_cast<std::uint16_t>(samples.rows());
  const std::uint32_t block = channels * bits / 8;
  const auto data_size = static_cast<std::uint32_t>(block * samples.cols());
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate_hz));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size + (data_size & 1U));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (Eigen::Index t = 0; t < samples.cols(); ++t) {
    for (Eigen::Index c = 0; c < samples.rows(); ++c) {
      const double v = samples(c, t);
      if (format == SampleFormat::kFloat32) {
        const auto f = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        put_u32(out, u);
      } else {
        // Same full-scale factor as the reader, so a round trip is within
        // half a step; +1.0 saturates at the largest code.
        const double scale = format == SampleFormat::kPcm16 ? 32768.0 : 8388608.0;
        const auto q = static_cast<std::int32_t>(std::clamp(std::round(v * scale), -scale, scale - 1.0));
        const auto u = static_cast<std::uint32_t>(q);
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
        if (format == SampleFormat::kPcm24) out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
      }
    }
  }
  if (data_size & 1U) out.push_back(0);
  internal::write_file(path, out);
}

void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio, SampleFormat format) {
  write_wav(path, audio.samples, audio.sample_rate_hz, format);
}

}  // namespace bsm
