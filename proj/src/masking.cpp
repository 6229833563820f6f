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

#include "bandbeam/masking.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace bandbeam {
namespace {

constexpr char kMagic[4] = {'H', 'B', 'M', 'K'};
constexpr std::uint8_t kVersion = 1;

void require_single_channel(const Spectrogram& s, const char* what) {
  if (s.channel_count() != 1)
    throw Error(std::string(what) + " must be a single-channel spectrogram");
}

void put32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xFF), char(v >> 8 & 0xFF), char(v >> 16 & 0xFF),
                     char(v >> 24 & 0xFF)};
  os.write(b, 4);
}

std::uint32_t get32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

}  // namespace

Eigen::MatrixXcd clip_magnitude(const Eigen::MatrixXcd& m, double clip) {
  if (!(clip > 0.0)) throw Error("mask clip must be positive");
  Eigen::MatrixXcd out = m;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    Complex& v = out.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      v = 0.0;
      continue;
    }
    const double mag = std::abs(v);
    if (mag > clip) v *= clip / mag;
  }
  return out;
}

Mask oracle_cirm(const Spectrogram& clean_ref, const Spectrogram& ref, double clip) {
  require_single_channel(clean_ref, "clean reference");
  require_single_channel(ref, "reference");
  if (!clean_ref.same_shape(ref))
    throw Error("oracle mask: clean and reference spectrograms differ in shape");
  const Eigen::MatrixXcd& s = clean_ref.channel(0);
  const Eigen::MatrixXcd& x = ref.channel(0);
  const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(x.size(), 1)));
  const double floor = 1e-12 * rms;

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x.data()[i]) > floor) m.data()[i] = s.data()[i] / x.data()[i];
  return {clip_magnitude(m, clip), clip};
}

Spectrogram apply_mask(const Mask& mask, const Spectrogram& ref) {
  require_single_channel(ref, "reference");
  if (mask.data.rows() != ref.bins() || mask.data.cols() != ref.frames())
    throw Error("mask shape " + std::to_string(mask.data.rows()) + "x" +
                std::to_string(mask.data.cols()) + " does not match reference " +
                std::to_string(ref.bins()) + "x" + std::to_string(ref.frames()));
  return Spectrogram({mask.data.cwiseProduct(ref.channel(0))}, ref.config(),
                     ref.sample_rate());
}

void save_mask(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write mask file " + path.string());
  out.write(kMagic, 4);
  const char version_and_pad[4] = {char(kVersion), 0, 0, 0};
  out.write(version_and_pad, 4);
  put32(out, static_cast<std::uint32_t>(mask.data.rows()));
  put32(out, static_cast<std::uint32_t>(mask.data.cols()));
  for (Eigen::Index k = 0; k < mask.data.rows(); ++k) {
    for (Eigen::Index i = 0; i < mask.data.cols(); ++i) {
      for (float v : {static_cast<float>(mask.data(k, i).real()),
                      static_cast<float>(mask.data(k, i).imag())}) {
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        put32(out, u);
      }
    }
  }
  if (!out) throw Error("failed writing mask file " + path.string());
}

Mask load_external_mask(const std::filesystem::path& path, Eigen::Index bins,
                        Eigen::Index frames, double clip) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mask file " + path.string());
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16))
    throw Error(path.string() + ": truncated mask header");
  if (std::memcmp(header, kMagic, 4) != 0)
    throw Error(path.string() + ": bad magic, expected HBMK");
  if (header[4] != kVersion)
    throw Error(path.string() + ": unsupported mask version " + std::to_string(header[4]));
  const std::uint32_t file_bins = get32(header + 8);
  const std::uint32_t file_frames = get32(header + 12);
  if (file_bins != bins)
    throw Error(path.string() + ": expected " + std::to_string(bins) + " bins, found " +
                std::to_string(file_bins));
  if (file_frames != frames)
    throw Error(path.string() + ": expected " + std::to_string(frames) +
                " frames, found " + std::to_string(file_frames));

  const std::size_t count = std::size_t(bins) * std::size_t(frames) * 2;
  std::vector<unsigned char> payload(count * 4);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size())))
    throw Error(path.string() + ": truncated mask payload");
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(path.string() + ": trailing bytes after mask payload");

  Eigen::MatrixXcd data(bins, frames);
  const unsigned char* p = payload.data();
  for (Eigen::Index k = 0; k < bins; ++k) {
    for (Eigen::Index i = 0; i < frames; ++i) {
      float re, im;
      const std::uint32_t ur = get32(p), ui = get32(p + 4);
      std::memcpy(&re, &ur, 4);
      std::memcpy(&im, &ui, 4);
      data(k, i) = Complex(re, im);
      p += 8;
    }
  }
  return {clip_magnitude(data, clip), clip};
}

Mask OracleMaskProvider::produce(const Spectrogram&, const Spectrogram& reference) const {
  return oracle_cirm(clean_ref_, reference, clip_);
}

Mask FileMaskProvider::produce(const Spectrogram&, const Spectrogram& reference) const {
  return load_external_mask(path_, reference.bins(), reference.frames(), clip_);
}

}  // namespace bandbeam
