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

#ifndef BANDBEAM_AUDIO_HPP_
#define BANDBEAM_AUDIO_HPP_

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bandbeam {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSampleRate = 16000.0;

using Complex = std::complex<double>;

/// Time-domain samples, one row per channel. All channels share one length
/// by construction of the underlying matrix.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(Eigen::MatrixXd samples, double sample_rate = kSampleRate);

  static AudioBuffer mono(Eigen::VectorXd samples,
                          double sample_rate = kSampleRate);
  static AudioBuffer zeros(Eigen::Index channels, Eigen::Index length,
                           double sample_rate = kSampleRate);

  const Eigen::MatrixXd& samples() const { return samples_; }
  Eigen::MatrixXd& samples() { return samples_; }
  double sample_rate() const { return sample_rate_; }
  Eigen::Index channel_count() const { return samples_.rows(); }
  Eigen::Index length() const { return samples_.cols(); }

  /// Copy of one channel as a column vector.
  Eigen::VectorXd channel(Eigen::Index c) const {
    return samples_.row(c).transpose();
  }
  AudioBuffer select_channel(Eigen::Index c) const;
  /// First `n` samples of every channel; `n` must not exceed length().
  AudioBuffer truncated(Eigen::Index n) const;

 private:
  Eigen::MatrixXd samples_;
  double sample_rate_ = kSampleRate;
};

struct StftConfig {
  int fft_size = 512;
  int hop = 256;

  int bins() const { return fft_size / 2 + 1; }
  double bin_width(double sample_rate = kSampleRate) const {
    return sample_rate / fft_size;
  }
  /// Throws unless fft_size is even and positive and hop == fft_size / 2.
  void validate() const;
};

/// Periodic Hann window of the given length.
Eigen::VectorXd hann_window(int length);

/// One-sided complex STFT. Each channel is a bins x frames matrix.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::vector<Eigen::MatrixXcd> channels, StftConfig config,
              double sample_rate = kSampleRate);

  static Spectrogram zeros(Eigen::Index channels, Eigen::Index frames,
                           StftConfig config = {},
                           double sample_rate = kSampleRate);

  Eigen::Index channel_count() const {
    return static_cast<Eigen::Index>(channels_.size());
  }
  Eigen::Index bins() const { return channels_.empty() ? 0 : channels_[0].rows(); }
  Eigen::Index frames() const {
    return channels_.empty() ? 0 : channels_[0].cols();
  }
  const StftConfig& config() const { return config_; }
  double sample_rate() const { return sample_rate_; }
  double bin_width() const { return config_.bin_width(sample_rate_); }

  const Eigen::MatrixXcd& channel(Eigen::Index c) const { return channels_[c]; }
  Eigen::MatrixXcd& channel(Eigen::Index c) { return channels_[c]; }
  const std::vector<Eigen::MatrixXcd>& channels() const { return channels_; }

  Spectrogram select_channel(Eigen::Index c) const;
  bool same_shape(const Spectrogram& other) const;

 private:
  std::vector<Eigen::MatrixXcd> channels_;
  StftConfig config_;
  double sample_rate_ = kSampleRate;
};

/// Number of frames stft() produces for `length` samples.
Eigen::Index frame_count(Eigen::Index length, const StftConfig& config);

Spectrogram stft(const AudioBuffer& buffer, const StftConfig& config = {});

/// Weighted overlap-add synthesis. Output length is
/// (frames - 1) * hop + fft_size. Each sample is divided by the summed
/// squared window, floored at 0.1, so reconstruction is exact except for a
/// short fade over the first and last ~100 samples.
AudioBuffer istft(const Spectrogram& spec);

/// Half-open bin range [lo, hi) selected for a frequency band.
struct BinRange {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
};

/// Maps [f_lo, f_hi) Hz onto bins by ceil(f / bin_width) for both edges. An
/// upper edge at Nyquist also keeps the Nyquist bin, so contiguous bands
/// tile the full spectrum.
BinRange band_bins(double f_lo, double f_hi, const StftConfig& config,
                   double sample_rate = kSampleRate);

struct BandProjection {
  AudioBuffer audio;  // same length as the input
  BinRange bins;
};

/// STFT, zero every bin outside the band, inverse STFT.
BandProjection band_project(const AudioBuffer& buffer, double f_lo, double f_hi,
                            const StftConfig& config = {});

}  // namespace bandbeam

#endif  // BANDBEAM_AUDIO_HPP_
