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

#include "bandbeam/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <unsupported/Eigen/FFT>

namespace bandbeam {
namespace {

constexpr double kWindowNormFloor = 0.1;

}  // namespace

AudioBuffer::AudioBuffer(Eigen::MatrixXd samples, double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0.0) throw Error("sample rate must be positive");
  if (samples_.rows() < 1) throw Error("audio buffer needs at least one channel");
}

AudioBuffer AudioBuffer::mono(Eigen::VectorXd samples, double sample_rate) {
  return AudioBuffer(Eigen::MatrixXd(samples.transpose()), sample_rate);
}

AudioBuffer AudioBuffer::zeros(Eigen::Index channels, Eigen::Index length,
                               double sample_rate) {
  return AudioBuffer(Eigen::MatrixXd::Zero(channels, length), sample_rate);
}

AudioBuffer AudioBuffer::select_channel(Eigen::Index c) const {
  if (c < 0 || c >= channel_count()) throw Error("channel index out of range");
  return AudioBuffer(Eigen::MatrixXd(samples_.row(c)), sample_rate_);
}

AudioBuffer AudioBuffer::truncated(Eigen::Index n) const {
  if (n > length()) throw Error("cannot truncate beyond buffer length");
  return AudioBuffer(Eigen::MatrixXd(samples_.leftCols(n)), sample_rate_);
}

void StftConfig::validate() const {
  if (fft_size < 2 || fft_size % 2 != 0)
    throw Error("fft_size must be a positive even number");
  if (hop != fft_size / 2) throw Error("hop must equal fft_size / 2");
}

Eigen::VectorXd hann_window(int length) {
  Eigen::VectorXd w(length);
  for (int n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

Spectrogram::Spectrogram(std::vector<Eigen::MatrixXcd> channels,
                         StftConfig config, double sample_rate)
    : channels_(std::move(channels)), config_(config), sample_rate_(sample_rate) {
  config_.validate();
  for (const auto& c : channels_) {
    if (c.rows() != config_.bins())
      throw Error("spectrogram bin count does not match fft_size");
    if (c.cols() != channels_[0].cols())
      throw Error("spectrogram channels differ in frame count");
  }
}

Spectrogram Spectrogram::zeros(Eigen::Index channels, Eigen::Index frames,
                               StftConfig config, double sample_rate) {
  std::vector<Eigen::MatrixXcd> data(
      channels, Eigen::MatrixXcd::Zero(config.bins(), frames));
  return Spectrogram(std::move(data), config, sample_rate);
}

Spectrogram Spectrogram::select_channel(Eigen::Index c) const {
  if (c < 0 || c >= channel_count()) throw Error("channel index out of range");
  return Spectrogram({channels_[c]}, config_, sample_rate_);
}

bool Spectrogram::same_shape(const Spectrogram& other) const {
  return channel_count() == other.channel_count() && bins() == other.bins() &&
         frames() == other.frames();
}

Eigen::Index frame_count(Eigen::Index length, const StftConfig& config) {
  if (length < config.fft_size) return 0;
  const Eigen::Index rest = length - config.fft_size;
  return 1 + (rest + config.hop - 1) / config.hop;
}

Spectrogram stft(const AudioBuffer& buffer, const StftConfig& config) {
  config.validate();
  const Eigen::Index n_fft = config.fft_size;
  if (buffer.length() < n_fft) throw Error("input too short");

  const Eigen::Index frames = frame_count(buffer.length(), config);
  const Eigen::VectorXd window = hann_window(config.fft_size);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  std::vector<Eigen::MatrixXcd> out;
  out.reserve(buffer.channel_count());
  std::vector<double> frame(n_fft);
  std::vector<Complex> spectrum;
  for (Eigen::Index c = 0; c < buffer.channel_count(); ++c) {
    Eigen::MatrixXcd data(config.bins(), frames);
    const auto row = buffer.samples().row(c);
    for (Eigen::Index f = 0; f < frames; ++f) {
      const Eigen::Index start = f * config.hop;
      for (Eigen::Index n = 0; n < n_fft; ++n) {
        const Eigen::Index t = start + n;
        frame[n] = t < buffer.length() ? row[t] * window[n] : 0.0;
      }
      fft.fwd(spectrum, frame);
      for (Eigen::Index k = 0; k < config.bins(); ++k) data(k, f) = spectrum[k];
    }
    out.push_back(std::move(data));
  }
  return Spectrogram(std::move(out), config, buffer.sample_rate());
}

AudioBuffer istft(const Spectrogram& spec) {
  const StftConfig& config = spec.config();
  config.validate();
  const Eigen::Index n_fft = config.fft_size;
  const Eigen::Index frames = spec.frames();
  if (spec.channel_count() < 1 || frames < 1)
    throw Error("cannot invert an empty spectrogram");

  const Eigen::Index length = (frames - 1) * config.hop + n_fft;
  const Eigen::VectorXd window = hann_window(config.fft_size);

  Eigen::VectorXd norm = Eigen::VectorXd::Zero(length);
  for (Eigen::Index f = 0; f < frames; ++f)
    norm.segment(f * config.hop, n_fft) += window.cwiseAbs2();

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec.channel_count(), length);
  std::vector<Complex> spectrum(config.bins());
  std::vector<double> frame;
  for (Eigen::Index c = 0; c < spec.channel_count(); ++c) {
    const Eigen::MatrixXcd& data = spec.channel(c);
    for (Eigen::Index f = 0; f < frames; ++f) {
      for (Eigen::Index k = 0; k < config.bins(); ++k) spectrum[k] = data(k, f);
      fft.inv(frame, spectrum, n_fft);
      const Eigen::Index start = f * config.hop;
      for (Eigen::Index n = 0; n < n_fft; ++n)
        out(c, start + n) += frame[n] * window[n];
    }
  }
  // The summed squared window lies in [0.5, 1] wherever two frames overlap
  // but falls to zero at the outer edges. Flooring it keeps a modified
  // spectrum from being amplified there; an unmodified one just fades in.
  for (Eigen::Index t = 0; t < length; ++t)
    out.col(t) /= std::max(norm[t], kWindowNormFloor);
  return AudioBuffer(std::move(out), spec.sample_rate());
}

BinRange band_bins(double f_lo, double f_hi, const StftConfig& config,
                   double sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= nyquist))
    throw Error("band edges must satisfy 0 <= f_lo < f_hi <= Nyquist");
  const double width = config.bin_width(sample_rate);
  // Snap edges that sit on a bin center to that bin despite rounding noise.
  auto edge = [width](double f) {
    const double r = f / width;
    const double nearest = std::round(r);
    return static_cast<Eigen::Index>(
        std::abs(r - nearest) < 1e-9 ? nearest : std::ceil(r));
  };
  BinRange range{edge(f_lo), edge(f_hi)};
  if (f_hi >= nyquist) range.hi = config.bins();
  range.hi = std::min<Eigen::Index>(range.hi, config.bins());
  if (range.hi <= range.lo) throw Error("degenerate band");
  return range;
}

BandProjection band_project(const AudioBuffer& buffer, double f_lo, double f_hi,
                            const StftConfig& config) {
  const BinRange range = band_bins(f_lo, f_hi, config, buffer.sample_rate());
  Spectrogram spec = stft(buffer, config);
  for (Eigen::Index c = 0; c < spec.channel_count(); ++c) {
    Eigen::MatrixXcd& data = spec.channel(c);
    data.topRows(range.lo).setZero();
    data.bottomRows(data.rows() - range.hi).setZero();
  }
  AudioBuffer full = istft(spec);
  return {full.truncated(buffer.length()), range};
}

}  // namespace bandbeam
