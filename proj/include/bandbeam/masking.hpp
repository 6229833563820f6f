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

#ifndef BANDBEAM_MASKING_HPP_
#define BANDBEAM_MASKING_HPP_

#include <filesystem>
#include <memory>

#include <Eigen/Dense>

#include "bandbeam/audio.hpp"

namespace bandbeam {

inline constexpr double kDefaultMaskClip = 10.0;

/// Complex ratio mask, bins x frames, magnitude bounded by `clip`.
struct Mask {
  Eigen::MatrixXcd data;
  double clip = kDefaultMaskClip;
};

/// Scales every entry above `clip` in magnitude down to `clip`, keeping its
/// phase. Non-finite entries become zero.
Eigen::MatrixXcd clip_magnitude(const Eigen::MatrixXcd& m, double clip);

/// M = clean / ref where |ref| exceeds 1e-12 of the reference RMS magnitude,
/// zero elsewhere, then clipped. Both inputs single-channel.
Mask oracle_cirm(const Spectrogram& clean_ref, const Spectrogram& ref,
                 double clip = kDefaultMaskClip);

/// S_hat = M * X_ref, elementwise.
Spectrogram apply_mask(const Mask& mask, const Spectrogram& ref);

/// Mask files: "HBMK", version byte, three zero bytes, bins and frames as
/// little-endian u32, then bins x frames (real, imag) float32 pairs, bin-major.
void save_mask(const std::filesystem::path& path, const Mask& mask);

/// Reads a mask file, checks its shape and applies `clip`.
Mask load_external_mask(const std::filesystem::path& path, Eigen::Index bins,
                        Eigen::Index frames, double clip = kDefaultMaskClip);

/// Seam for a mask estimator. Given the model input tensor and the
/// reference channel it returns a mask shaped like the reference.
class MaskProvider {
 public:
  virtual ~MaskProvider() = default;
  virtual Mask produce(const Spectrogram& model_input,
                       const Spectrogram& reference) const = 0;
};

/// Ideal mask from a known clean reference; ignores the model input.
class OracleMaskProvider : public MaskProvider {
 public:
  explicit OracleMaskProvider(Spectrogram clean_ref, double clip = kDefaultMaskClip)
      : clean_ref_(std::move(clean_ref)), clip_(clip) {}
  Mask produce(const Spectrogram& model_input, const Spectrogram& reference) const override;

 private:
  Spectrogram clean_ref_;
  double clip_;
};

/// Mask read from a file written by an external estimator.
class FileMaskProvider : public MaskProvider {
 public:
  explicit FileMaskProvider(std::filesystem::path path, double clip = kDefaultMaskClip)
      : path_(std::move(path)), clip_(clip) {}
  Mask produce(const Spectrogram& model_input, const Spectrogram& reference) const override;

 private:
  std::filesystem::path path_;
  double clip_;
};

}  // namespace bandbeam

#endif  // BANDBEAM_MASKING_HPP_
