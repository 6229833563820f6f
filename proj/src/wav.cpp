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

#include "bandbeam/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace bandbeam {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return std::uint32_t(u[0]) | std::uint32_t(u[1]) << 8 |
         std::uint32_t(u[2]) << 16 | std::uint32_t(u[3]) << 24;
}

std::uint16_t le16(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint16_t>(u[0] | u[1] << 8);
}

void put32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xFF), char(v >> 8 & 0xFF), char(v >> 16 & 0xFF),
                     char(v >> 24 & 0xFF)};
  os.write(b, 4);
}

void put16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {char(v & 0xFF), char(v >> 8 & 0xFF)};
  os.write(b, 2);
}

struct ParsedWav {
  WavInfo info;
  std::vector<char> data;
};

ParsedWav parse(const std::filesystem::path& path, bool want_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file " + path.string());
  char header[12];
  if (!in.read(header, 12) || std::memcmp(header, "RIFF", 4) != 0 ||
      std::memcmp(header + 8, "WAVE", 4) != 0)
    throw Error(path.string() + ": not a RIFF/WAVE file");

  ParsedWav out;
  bool have_fmt = false;
  bool have_data = false;
  std::uint32_t data_bytes = 0;
  char chunk[8];
  while (in.read(chunk, 8)) {
    const std::uint32_t size = le32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(path.string() + ": short fmt chunk");
      std::vector<char> fmt(size);
      in.read(fmt.data(), size);
      std::uint16_t tag = le16(fmt.data());
      out.info.channels = le16(fmt.data() + 2);
      out.info.sample_rate = static_cast<int>(le32(fmt.data() + 4));
      out.info.bits_per_sample = le16(fmt.data() + 14);
      if (tag == kFormatExtensible && size >= 26) tag = le16(fmt.data() + 24);
      if (tag == kFormatPcm && out.info.bits_per_sample == 16)
        out.info.encoding = WavEncoding::kPcm16;
      else if (tag == kFormatFloat && out.info.bits_per_sample == 32)
        out.info.encoding = WavEncoding::kFloat32;
      else
        throw Error(path.string() + ": unsupported WAV encoding (tag " +
                    std::to_string(tag) + ", " +
                    std::to_string(out.info.bits_per_sample) + " bits)");
      if (out.info.channels < 1) throw Error(path.string() + ": zero channels");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data_bytes = size;
      have_data = true;
      if (want_data) {
        out.data.resize(size);
        in.read(out.data.data(), size);
        data_bytes = static_cast<std::uint32_t>(in.gcount());
        out.data.resize(data_bytes);
      }
      break;
    } else {
      in.seekg(size, std::ios::cur);
    }
    if (size & 1) in.seekg(1, std::ios::cur);
  }
  if (!have_fmt) throw Error(path.string() + ": missing fmt chunk");
  if (!have_data) throw Error(path.string() + ": missing data chunk");
  const int bytes_per_frame = out.info.channels * out.info.bits_per_sample / 8;
  out.info.frames = static_cast<long>(data_bytes / bytes_per_frame);
  return out;
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  return parse(path, false).info;
}

AudioBuffer read_wav(const std::filesystem::path& path,
                     std::optional<int> required_rate) {
  ParsedWav wav = parse(path, true);
  const WavInfo& info = wav.info;
  if (required_rate && info.sample_rate != *required_rate)
    throw Error(path.string() + ": sample rate " +
                std::to_string(info.sample_rate) + " Hz, expected " +
                std::to_string(*required_rate) + " Hz");
  Eigen::MatrixXd samples(info.channels, info.frames);
  const char* p = wav.data.data();
  for (long t = 0; t < info.frames; ++t) {
    for (int c = 0; c < info.channels; ++c) {
      if (info.encoding == WavEncoding::kPcm16) {
        samples(c, t) = static_cast<std::int16_t>(le16(p)) / 32768.0;
        p += 2;
      } else {
        const std::uint32_t bits = le32(p);
        float v;
        std::memcpy(&v, &bits, 4);
        samples(c, t) = v;
        p += 4;
      }
    }
  }
  return AudioBuffer(std::move(samples), info.sample_rate);
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write WAV file " + path.string());
  const auto channels = static_cast<std::uint16_t>(buffer.channel_count());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const auto rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate()));
  const std::uint32_t block = channels * bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(buffer.length() * block);

  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put16(out, channels);
  put32(out, rate);
  put32(out, rate * block);
  put16(out, static_cast<std::uint16_t>(block));
  put16(out, bits);
  out.write("data", 4);
  put32(out, data_bytes);

  const Eigen::MatrixXd& s = buffer.samples();
  for (Eigen::Index t = 0; t < buffer.length(); ++t) {
    for (Eigen::Index c = 0; c < buffer.channel_count(); ++c) {
      if (encoding == WavEncoding::kPcm16) {
        const double v = std::clamp(std::round(s(c, t) * 32768.0), -32768.0, 32767.0);
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
      } else {
        const float v = static_cast<float>(s(c, t));
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put32(out, u);
      }
    }
  }
  if (!out) throw Error("failed writing WAV file " + path.string());
}

}  // namespace bandbeam
