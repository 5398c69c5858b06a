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

#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "bsm/error.h"

namespace bsm {
namespace {

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

MultichannelAudio ramp(int channels, int frames, double fs) {
  MultichannelAudio audio;
  audio.sample_rate_hz = fs;
  audio.samples.resize(channels, frames);
  for (int c = 0; c < channels; ++c) {
    for (int n = 0; n < frames; ++n) audio.samples(c, n) = 0.9 * std::sin(0.01 * n * (c + 1));
  }
  return audio;
}

void append(std::vector<char>& out, const void* data, std::size_t n) {
  const auto* p = static_cast<const char*>(data);
  out.insert(out.end(), p, p + n);
}

TEST(Wav, Float32RoundTrip) {
  const auto audio = ramp(3, 500, 48000.0);
  const auto path = temp_file("bsm_wav_f32.wav");
  write_wav(path, audio, SampleFormat::kFloat32);
  const auto back = read_wav(path);
  EXPECT_DOUBLE_EQ(back.sample_rate_hz, 48000.0);
  ASSERT_EQ(back.channels(), 3);
  ASSERT_EQ(back.frames(), 500);
  EXPECT_LT((back.samples - audio.samples).cwiseAbs().maxCoeff(), 1e-7);
  std::filesystem::remove(path);
}

TEST(Wav, IntegerFormatsQuantize) {
  const auto audio = ramp(2, 300, 44100.0);
  for (auto [format, step] : {std::pair{SampleFormat::kPcm16, 1.0 / 32768}, std::pair{SampleFormat::kPcm24, 1.0 / 8388608}}) {
    const auto path = temp_file("bsm_wav_int.wav");
    write_wav(path, audio, format);
    const auto back = read_wav(path);
    EXPECT_DOUBLE_EQ(back.sample_rate_hz, 44100.0);
    EXPECT_LE((back.samples - audio.samples).cwiseAbs().maxCoeff(), 0.5 * step + 1e-12);
    std::filesystem::remove(path);
  }
}

TEST(Wav, IntegerOutputClips) {
  RealMatrix loud(1, 3);
  loud << 2.0, -2.0, 0.0;
  const auto path = temp_file("bsm_wav_clip.wav");
  write_wav(path, loud, 48000.0, SampleFormat::kPcm16);
  const auto back = read_wav(path);
  EXPECT_NEAR(back.samples(0, 0), 1.0, 1e-4);
  EXPECT_DOUBLE_EQ(back.samples(0, 1), -1.0);
  std::filesystem::remove(path);
}

TEST(Wav, ReadsExtensibleFloat64) {
  // Hand-built WAVE_FORMAT_EXTENSIBLE header with an IEEE float sub-format.
  const std::vector<double> samples = {0.25, -0.5, 0.125, 1.0};  // 2 frames x 2 channels
  std::vector<char> file;
  const std::uint32_t data_bytes = 32, fmt_bytes = 40, riff = 4 + 8 + fmt_bytes + 8 + data_bytes;
  const std::uint16_t tag = 0xFFFE, channels = 2, bits = 64, block = 16, cb = 22, valid = 64;
  const std::uint32_t rate = 16000, byte_rate = rate * block, mask = 3;
  const std::uint8_t guid[16] = {3, 0, 0, 0, 0, 0, 0x10, 0, 0x80, 0, 0, 0xAA, 0, 0x38, 0x9B, 0x71};
  append(file, "RIFF", 4);
  append(file, &riff, 4);
  append(file, "WAVE", 4);
  append(file, "fmt ", 4);
  append(file, &fmt_bytes, 4);
  append(file, &tag, 2);
  append(file, &channels, 2);
  append(file, &rate, 4);
  append(file, &byte_rate, 4);
  append(file, &block, 2);
  append(file, &bits, 2);
  append(file, &cb, 2);
  append(file, &valid, 2);
  append(file, &mask, 4);
  append(file, guid, 16);
  append(file, "data", 4);
  append(file, &data_bytes, 4);
  append(file, samples.data(), 32);
  const auto path = temp_file("bsm_wav_ext.wav");
  std::ofstream(path, std::ios::binary).write(file.data(), static_cast<std::streamsize>(file.size()));
  const auto audio = read_wav(path);
  EXPECT_DOUBLE_EQ(audio.sample_rate_hz, 16000.0);
  ASSERT_EQ(audio.channels(), 2);
  ASSERT_EQ(audio.frames(), 2);
  EXPECT_DOUBLE_EQ(audio.samples(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(audio.samples(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(audio.samples(1, 1), 1.0);
  std::filesystem::remove(path);
}

TEST(Wav, RejectsNonWaveInput) {
  const auto path = temp_file("bsm_wav_bad.wav");
  std::ofstream(path, std::ios::binary) << "definitely not a wave file";
  EXPECT_THROW(read_wav(path), Error);
  std::filesystem::remove(path);
  EXPECT_THROW(read_wav(temp_file("bsm_wav_missing.wav")), Error);
}

TEST(Wav, SampleFormatNames) {
  EXPECT_EQ(parse_sample_format("pcm16"), SampleFormat::kPcm16);
  EXPECT_EQ(parse_sample_format("pcm24"), SampleFormat::kPcm24);
  EXPECT_EQ(parse_sample_format("float32"), SampleFormat::kFloat32);
  EXPECT_THROW(parse_sample_format("mp3"), Error);
}

}  // namespace
}  // namespace bsm
