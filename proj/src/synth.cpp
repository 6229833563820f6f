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

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bandbeam/corpus.hpp"
#include "bandbeam/wav.hpp"

namespace bandbeam {
namespace {

// Two-pole resonator with unity gain at its centre frequency.
class Resonator {
 public:
  Resonator(double freq, double bandwidth, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth / fs);
    const double theta = 2.0 * std::numbers::pi * freq / fs;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    gain_ = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * theta) + r * r);
  }
  double operator()(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0.0, a2_ = 0.0, gain_ = 1.0, y1_ = 0.0, y2_ = 0.0;
};

}  // namespace

AudioBuffer synth_utterance(std::uint64_t seed, double seconds, int speaker) {
  const double fs = kSampleRate;
  const auto length = static_cast<Eigen::Index>(std::lround(seconds * fs));
  if (length < 1) throw Error("utterance length must be positive");
  std::mt19937_64 rng(seed);
  using Uniform = std::uniform_real_distribution<double>;
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Speaker traits: pitch and vocal-tract scaling.
  std::mt19937_64 speaker_rng(0x5eed0000ULL + static_cast<std::uint64_t>(speaker));
  const double base_f0 = Uniform(95.0, 230.0)(speaker_rng);
  const double tract = Uniform(0.88, 1.15)(speaker_rng);

  Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
  Eigen::Index t = static_cast<Eigen::Index>(Uniform(0.05, 0.2)(rng) * fs);
  double phase = 0.0;
  while (t < length) {
    const auto syllable = static_cast<Eigen::Index>(Uniform(0.12, 0.32)(rng) * fs);
    const auto fricative = static_cast<Eigen::Index>(
        Uniform(0.0, 1.0)(rng) < 0.45 ? Uniform(0.03, 0.09)(rng) * fs : 0.0);
    const double f0_start = base_f0 * Uniform(0.85, 1.2)(rng);
    const double f0_end = base_f0 * Uniform(0.8, 1.1)(rng);
    const double level = Uniform(0.4, 1.0)(rng);
    Resonator f1(tract * Uniform(300.0, 850.0)(rng), 80.0, fs);
    Resonator f2(tract * Uniform(850.0, 2300.0)(rng), 110.0, fs);
    Resonator f3(tract * Uniform(2300.0, 3200.0)(rng), 160.0, fs);
    Resonator hiss(Uniform(3500.0, 6500.0)(rng), 2500.0, fs);

    double glottal_lp1 = 0.0, glottal_lp2 = 0.0, prev = 0.0, noise_prev = 0.0;
    for (Eigen::Index n = 0; n < fricative && t < length; ++n, ++t) {
      const double w = std::sin(std::numbers::pi * n / fricative);
      const double white = gauss(rng);
      const double hp = white - noise_prev;
      noise_prev = white;
      out[t] += 0.03 * level * w * hiss(hp);
    }
    for (Eigen::Index n = 0; n < syllable && t < length; ++n, ++t) {
      const double frac = static_cast<double>(n) / syllable;
      const double f0 = f0_start + (f0_end - f0_start) * frac;
      phase += f0 / fs;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      pulse += 0.02 * gauss(rng);  // aspiration
      glottal_lp1 = pulse + 0.96 * glottal_lp1;
      glottal_lp2 = glottal_lp1 + 0.96 * glottal_lp2;
      const double radiated = glottal_lp2 - prev;
      prev = glottal_lp2;
      const double env = std::pow(std::sin(std::numbers::pi * frac), 0.6);
      const double voiced = f1(radiated) + 1.5 * f2(radiated) + 1.2 * f3(radiated);
      out[t] += level * env * voiced;
    }
    t += static_cast<Eigen::Index>(Uniform(0.03, 0.15)(rng) * fs);
  }
  const double peak = out.cwiseAbs().maxCoeff();
  if (peak > 0.0) out *= 0.5 / peak;
  return AudioBuffer::mono(std::move(out));
}

std::vector<std::filesystem::path> write_synthetic_corpus(
    const std::filesystem::path& dir, int count, double seconds, std::uint64_t seed,
    int speakers) {
  namespace fs = std::filesystem;
  if (count < 1 || speakers < 1) throw Error("corpus needs at least one utterance and speaker");
  std::vector<fs::path> written;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    const int speaker = i % speakers;
    char spk[16], utt[32];
    std::snprintf(spk, sizeof(spk), "spk%02d", speaker);
    std::snprintf(utt, sizeof(utt), "utt%04d.wav", i);
    const fs::path sub = dir / spk;
    fs::create_directories(sub);
    const fs::path path = sub / utt;
    write_wav(path, synth_utterance(rng(), seconds, speaker), WavEncoding::kPcm16);
    written.push_back(path);
  }
  return written;
}

}  // namespace bandbeam
