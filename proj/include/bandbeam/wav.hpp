// Copyright 2026 The bandbeam Authors
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

#ifndef BANDBEAM_WAV_HPP_
#define BANDBEAM_WAV_HPP_

#include <filesystem>
#include <optional>

#include "bandbeam/audio.hpp"

namespace bandbeam {

enum class WavEncoding { kPcm16, kFloat32 };

struct WavInfo {
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  WavEncoding encoding = WavEncoding::kPcm16;
  long frames = 0;
};

/// Reads the format chunk only.
WavInfo read_wav_info(const std::filesystem::path& path);

/// Reads a RIFF/WAVE file (PCM16 or IEEE float32, plain or extensible
/// format tag). When `required_rate` is set, any other rate is an error.
AudioBuffer read_wav(const std::filesystem::path& path,
                     std::optional<int> required_rate = 16000);

/// Writes interleaved samples. PCM16 clips to [-1, 1).
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace bandbeam

#endif  // BANDBEAM_WAV_HPP_
