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

#ifndef BSM_WAV_H_
#define BSM_WAV_H_

#include <filesystem>
#include <string_view>

#include "bsm/render.h"

namespace bsm {

enum class SampleFormat { kPcm16, kPcm24, kFloat32 };

SampleFormat parse_sample_format(std::string_view name);

// RIFF/WAVE reader for PCM 16/24/32-bit integer and 32/64-bit IEEE float
// data (including WAVE_FORMAT_EXTENSIBLE). Samples are scaled to [-1, 1).
MultichannelAudio read_wav(const std::filesystem::path& path);

// Writes interleaved samples; integer formats are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio,
               SampleFormat format = SampleFormat::kFloat32);
void write_wav(const std::filesystem::path& path, const RealMatrix& samples, double sample_rate_hz,
               SampleFormat format = SampleFormat::kFloat32);

}  // namespace bsm

#endif  // BSM_WAV_H_
