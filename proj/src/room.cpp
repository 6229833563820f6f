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

#include "bandbeam/room.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

namespace bandbeam {
namespace {

constexpr double kSourceWallMargin = 0.05;  // m
constexpr int kInterfererRetries = 1000;
constexpr int kSceneRetries = 50;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Half-spectrum FFT of a zero-padded real signal.
std::vector<Complex> real_spectrum(Eigen::FFT<double>& fft,
                                   const Eigen::VectorXd& x, std::size_t nfft) {
  std::vector<double> padded(nfft, 0.0);
  std::copy(x.data(), x.data() + std::min<std::size_t>(x.size(), nfft),
            padded.begin());
  std::vector<Complex> out;
  fft.fwd(out, padded);
  return out;
}

Eigen::VectorXd convolve_spectra(Eigen::FFT<double>& fft,
                                 const std::vector<Complex>& a,
                                 const std::vector<Complex>& b, std::size_t nfft,
                                 Eigen::Index length) {
  std::vector<Complex> prod(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) prod[k] = a[k] * b[k];
  std::vector<double> time;
  fft.inv(time, prod, static_cast<Eigen::Index>(nfft));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
  const Eigen::Index n = std::min<Eigen::Index>(length, static_cast<Eigen::Index>(nfft));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = time[i];
  return out;
}

double mean_power(const Eigen::MatrixXd& x) {
  return x.size() == 0 ? 0.0 : x.squaredNorm() / static_cast<double>(x.size());
}

Eigen::Vector3d horizontal_offset(double angle, double distance) {
  return {distance * std::cos(angle), distance * std::sin(angle), 0.0};
}

std::string seed_context(std::optional<std::uint64_t> seed) {
  return seed ? " (seed " + std::to_string(*seed) + ")" : std::string();
}

Scene sample_scene_impl(std::mt19937_64& rng, const MicArray& array,
                        std::optional<std::uint64_t> seed) {
  using Uniform = std::uniform_real_distribution<double>;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double sector_width =
      (kSectorEndDeg - kSectorStartDeg) / kInterfererCount * std::numbers::pi / 180.0;
  const double sector_start = kSectorStartDeg * std::numbers::pi / 180.0;

  for (int attempt = 0; attempt < kSceneRetries; ++attempt) {
    Scene scene;
    scene.array = array;
    scene.room.dims.x() = Uniform(2.5, 5.0)(rng);
    scene.room.dims.y() = Uniform(3.0, 9.0)(rng);
    scene.room.dims.z() = Uniform(2.2, 3.5)(rng);
    scene.room.t60 = Uniform(0.2, 0.5)(rng);
    scene.pose.center = {Uniform(1.0, scene.room.dims.x() - 1.0)(rng),
                         Uniform(1.0, scene.room.dims.y() - 1.0)(rng), 1.5};
    scene.pose.yaw = Uniform(0.0, kTwoPi)(rng);
    scene.noise_seed = rng();

    scene.target.azimuth = 0.0;
    scene.target.distance = Uniform(0.3, 1.0)(rng);
    scene.target.height = 1.5;
    scene.target.position = scene.pose.center +
                            horizontal_offset(scene.pose.yaw, scene.target.distance);
    scene.target.position.z() = scene.target.height;
    if (!scene.room.contains(scene.target.position, kSourceWallMargin)) continue;

    std::normal_distribution<double> height(1.6, 0.28);
    bool feasible = true;
    for (int s = 0; s < kInterfererCount && feasible; ++s) {
      const double lo = sector_start + s * sector_width;
      Uniform azimuth(lo, lo + sector_width);
      bool placed = false;
      for (int tries = 0; tries < kInterfererRetries && !placed; ++tries) {
        SourceSpec src;
        src.azimuth = azimuth(rng);
        src.distance = Uniform(1.0, 8.0)(rng);
        src.height = std::clamp(height(rng), 0.2, scene.room.dims.z() - 0.2);
        src.position = scene.pose.center +
                       horizontal_offset(scene.pose.yaw + src.azimuth, src.distance);
        src.position.z() = src.height;
        if (scene.room.contains(src.position, kSourceWallMargin)) {
          scene.interferers.push_back(src);
          placed = true;
        }
      }
      feasible = placed;
    }
    if (!feasible) continue;
    absorption_from_t60(scene.room);
    scene.max_order = default_max_order(scene.room);
    if (seed) scene.seed = *seed;
    return scene;
  }
  throw Error("could not place sources after " + std::to_string(kSceneRetries) +
              " scene draws" + seed_context(seed));
}

}  // namespace

double absorption_from_t60(const Room& room) {
  if (!(room.t60 > 0.0)) throw Error("T60 must be positive");
  if (!(room.dims.array() > 0.0).all()) throw Error("room dimensions must be positive");
  const double alpha = 0.1611 * room.volume() / (room.surface() * room.t60);
  if (alpha >= 1.0) throw Error("infeasible T60");
  return std::min(alpha, 0.99);
}

double reflection_from_t60(const Room& room) {
  return std::sqrt(1.0 - absorption_from_t60(room));
}

namespace {

// Per-direction reflection rates sum_i |u_i| / D_i (reflections per metre of
// path) over a Fibonacci lattice on the unit sphere.
std::vector<double> lattice_rates(const Eigen::Vector3d& dims) {
  constexpr int kDirections = 1024;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<double> rates(kDirections);
  for (int i = 0; i < kDirections; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / kDirections;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    rates[i] = std::abs(r * std::cos(phi)) / dims.x() + std::abs(r * std::sin(phi)) / dims.y() +
               std::abs(z) / dims.z();
  }
  return rates;
}

// Decay time of the model envelope mean_u exp(-k g(u) t) over [0, horizon],
// read off its Schroeder curve between -5 and -25 dB.
double model_decay_time(const std::vector<double>& rates, double k, double horizon) {
  constexpr int kSteps = 256;
  const double dt = horizon / kSteps;
  std::array<double, kSteps> edc{};
  for (double g : rates) {
    const double kg = k * g;
    const double tail = std::exp(-kg * horizon);
    const double step = std::exp(-kg * dt);
    double e = 1.0;
    for (int j = 0; j < kSteps; ++j, e *= step) edc[j] += (e - tail) / kg;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int j = 0; j < kSteps; ++j) {
    const double db = 10.0 * std::log10(edc[j] / edc[0]);
    if (db > -5.0) continue;
    if (db < -25.0) break;
    const double t = j * dt;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++n;
  }
  if (n < 2) throw Error("decay model could not resolve the -5..-25 dB range");
  return -60.0 * (n * sxx - sx * sx) / (n * sxy - sx * sy);
}

}  // namespace

double decay_matched_reflection(const Room& room, double c) {
  // k is the energy decay rate per unit reflection rate: beta^(2 c t g) = exp(-k g t).
  double k = -2.0 * c * std::log(reflection_from_t60(room));
  const std::vector<double> rates = lattice_rates(room.dims);
  for (int iter = 0; iter < 50; ++iter) {
    // The decay time scales almost exactly as 1/k, so this converges in a few steps.
    const double ratio = model_decay_time(rates, k, room.t60) / room.t60;
    k *= ratio;
    if (std::abs(ratio - 1.0) < 1e-10) break;
  }
  return std::exp(-k / (2.0 * c));
}

double wall_reflection(const Room& room, double c) {
  return room.absorption == AbsorptionModel::kSabine ? reflection_from_t60(room)
                                                     : decay_matched_reflection(room, c);
}

void highpass_rir(Eigen::VectorXd& taps, double sample_rate, double cutoff_hz) {
  const double w = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w), b2 = -r1 * r1, a1 = -(1.0 + r1);
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (Eigen::Index n = 0; n < taps.size(); ++n) {
    const double x0 = taps[n];
    const double y0 = b1 * y1 + b2 * y2 + x0 + a1 * x1 + r1 * x2;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
    taps[n] = y0;
  }
}

int default_max_order(const Room& room, double c) {
  const double reach = c * room.t60;
  int order = 0;
  for (int i = 0; i < 3; ++i)
    order += static_cast<int>(std::ceil(reach / room.dims[i])) + 1;
  return order;
}

std::vector<ImageArrival> image_sources(const Room& room,
                                        const Eigen::Vector3d& source,
                                        const Eigen::Vector3d& mic, int max_order,
                                        double max_delay, double sample_rate,
                                        double c) {
  if (max_order < 0) throw Error("max_order must be non-negative");
  if (!room.contains(source) || !room.contains(mic))
    throw Error("source and microphone must lie inside the room");
  const double beta = wall_reflection(room, c);
  const double max_dist = max_delay / sample_rate * c;

  // Per axis, every mirror position (x = (1 - 2q) s + 2 n D) with its
  // reflection count |n - q| + |n|, pruned by order and distance.
  struct AxisImage {
    double offset;  // image coordinate minus mic coordinate
    int order;
  };
  std::array<std::vector<AxisImage>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    const double dim = room.dims[a];
    const int n_max = std::min(max_order / 2 + 1,
                               static_cast<int>(std::ceil(max_dist / (2.0 * dim))) + 1);
    for (int n = -n_max; n <= n_max; ++n) {
      for (int q = 0; q <= 1; ++q) {
        const int order = std::abs(n - q) + std::abs(n);
        const double offset = (1 - 2 * q) * source[a] + 2.0 * n * dim - mic[a];
        if (order <= max_order && std::abs(offset) <= max_dist)
          axes[a].push_back({offset, order});
      }
    }
  }

  std::vector<ImageArrival> out;
  const double max_dist2 = max_dist * max_dist;
  for (const AxisImage& ix : axes[0]) {
    const double dx2 = ix.offset * ix.offset;
    for (const AxisImage& iy : axes[1]) {
      const int oxy = ix.order + iy.order;
      const double dxy2 = dx2 + iy.offset * iy.offset;
      if (oxy > max_order || dxy2 > max_dist2) continue;
      for (const AxisImage& iz : axes[2]) {
        const int order = oxy + iz.order;
        const double d2 = dxy2 + iz.offset * iz.offset;
        if (order > max_order || d2 > max_dist2) continue;
        ImageArrival img;
        img.position = mic + Eigen::Vector3d(ix.offset, iy.offset, iz.offset);
        img.distance = std::sqrt(d2);
        img.delay = img.distance / c * sample_rate;
        img.amplitude = std::pow(beta, order) / (4.0 * std::numbers::pi * img.distance);
        img.order = order;
        out.push_back(img);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const ImageArrival& a, const ImageArrival& b) {
    return a.delay != b.delay ? a.delay < b.delay : a.order < b.order;
  });
  return out;
}

void add_fractional_impulse(Eigen::Ref<Eigen::VectorXd> taps, double delay,
                            double amplitude) {
  constexpr int kHalf = kFractionalDelayTaps / 2;
  // cos/sin of 2 pi m / Tw for the Hann window, shared by every call.
  static const auto table = [] {
    std::array<std::array<double, 2>, kFractionalDelayTaps> t{};
    for (int m = -kHalf; m <= kHalf; ++m) {
      const double arg = 2.0 * std::numbers::pi * m / kFractionalDelayTaps;
      t[m + kHalf] = {std::cos(arg), std::sin(arg)};
    }
    return t;
  }();

  const double center = std::round(delay);
  const double frac = delay - center;  // in [-0.5, 0.5]
  const double sin_pf = std::sin(std::numbers::pi * frac);
  const double wc = std::cos(2.0 * std::numbers::pi * frac / kFractionalDelayTaps);
  const double ws = std::sin(2.0 * std::numbers::pi * frac / kFractionalDelayTaps);
  const auto base = static_cast<Eigen::Index>(center);
  for (int m = -kHalf; m <= kHalf; ++m) {
    const Eigen::Index t = base + m;
    if (t < 0 || t >= taps.size()) continue;
    const double x = m - frac;
    double sinc;
    if (std::abs(x) < 1e-12) {
      sinc = 1.0;
    } else {
      // sin(pi (m - frac)) = -(-1)^m sin(pi frac)
      const double s = (m % 2 == 0 ? -1.0 : 1.0) * sin_pf;
      sinc = s / (std::numbers::pi * x);
    }
    const auto& cs = table[m + kHalf];
    const double window = 0.5 * (1.0 + cs[0] * wc + cs[1] * ws);
    taps[t] += amplitude * sinc * window;
  }
}

Rir simulate_rir(const Room& room, const Eigen::Vector3d& source,
                 const Eigen::Vector3d& mic, const RirOptions& options) {
  if (!room.contains(source) || !room.contains(mic))
    throw Error("source and microphone must lie inside the room");
  if ((source - mic).norm() < 1e-9) throw Error("source coincides with microphone");

  const double fs = options.sample_rate;
  const double c = options.speed_of_sound;
  const double direct = (source - mic).norm() / c * fs;
  const Eigen::Index length = options.length.value_or(
      std::max<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(room.t60 * fs)),
                             static_cast<Eigen::Index>(std::ceil(direct))) +
      kFractionalDelayTaps);
  const int max_order = options.max_order.value_or(default_max_order(room, c));

  Rir rir;
  rir.sample_rate = fs;
  rir.direct_path_delay = direct;
  rir.taps = Eigen::VectorXd::Zero(length);
  const double max_delay = static_cast<double>(length - 1) + kFractionalDelayTaps / 2;
  for (const ImageArrival& img :
       image_sources(room, source, mic, max_order, max_delay, fs, c))
    add_fractional_impulse(rir.taps, img.delay, img.amplitude);
  if (options.highpass) highpass_rir(rir.taps, fs);
  return rir;
}

int interferer_sector(double azimuth_rad) {
  double deg = azimuth_rad * 180.0 / std::numbers::pi;
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  if (deg < kSectorStartDeg || deg > kSectorEndDeg) return -1;
  const double width = (kSectorEndDeg - kSectorStartDeg) / kInterfererCount;
  return std::min(kInterfererCount - 1,
                  static_cast<int>((deg - kSectorStartDeg) / width));
}

void Scene::validate() const {
  array.validate();
  const Eigen::Matrix3Xd mics = world_positions(array, pose);
  for (Eigen::Index i = 0; i < mics.cols(); ++i)
    if (!room.contains(mics.col(i))) throw Error("scene " + id + ": mic outside room");
  if (!room.contains(target.position)) throw Error("scene " + id + ": target outside room");
  if (static_cast<int>(interferers.size()) != kInterfererCount)
    throw Error("scene " + id + ": expected 5 interferers");
  std::array<bool, kInterfererCount> seen{};
  for (const SourceSpec& s : interferers) {
    if (!room.contains(s.position))
      throw Error("scene " + id + ": interferer outside room");
    const int sector = interferer_sector(s.azimuth);
    if (sector < 0 || seen[sector])
      throw Error("scene " + id + ": interferers must occupy one sector each");
    seen[sector] = true;
  }
}

Scene sample_scene(std::mt19937_64& rng, const MicArray& array) {
  return sample_scene_impl(rng, array, std::nullopt);
}

Scene sample_scene(std::uint64_t seed, const MicArray& array) {
  std::mt19937_64 rng(seed);
  return sample_scene_impl(rng, array, seed);
}

Eigen::VectorXd fft_convolve(const Eigen::VectorXd& signal,
                             const Eigen::VectorXd& kernel, Eigen::Index length) {
  const std::size_t nfft = next_pow2(static_cast<std::size_t>(
      std::max<Eigen::Index>(signal.size() + kernel.size() - 1, 2)));
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  return convolve_spectra(fft, real_spectrum(fft, signal, nfft),
                          real_spectrum(fft, kernel, nfft), nfft, length);
}

RenderedScene render_mixture(const Scene& scene,
                             const std::vector<AudioBuffer>& utterances,
                             const RenderOptions& options) {
  const std::size_t sources = 1 + scene.interferers.size();
  if (utterances.size() != sources)
    throw Error("render_mixture: expected " + std::to_string(sources) +
                " utterances, got " + std::to_string(utterances.size()));
  for (const AudioBuffer& u : utterances) {
    if (u.channel_count() != 1) throw Error("render_mixture: utterances must be mono");
    if (u.sample_rate() != kSampleRate)
      throw Error("render_mixture: utterances must be sampled at 16 kHz");
  }

  const Eigen::Index length = utterances[0].length();
  std::vector<Eigen::VectorXd> dry(sources, Eigen::VectorXd::Zero(length));
  for (std::size_t s = 0; s < sources; ++s) {
    const Eigen::Index n = std::min(length, utterances[s].length());
    dry[s].head(n) = utterances[s].samples().row(0).head(n).transpose();
    const double rms = std::sqrt(dry[s].squaredNorm() / static_cast<double>(length));
    if (s == 0 && !(rms > 0.0)) throw Error("zero-power target");
    if (options.normalize_sources && rms > 0.0) dry[s] /= rms;
  }

  const Eigen::Matrix3Xd mics = world_positions(scene.array, scene.pose);
  const Eigen::Index channels = mics.cols();
  RirOptions rir_options = options.rir;
  rir_options.max_order = scene.max_order;

  std::vector<Eigen::Vector3d> positions{scene.target.position};
  for (const SourceSpec& s : scene.interferers) positions.push_back(s.position);

  // The longest RIR bounds the FFT size for every source/mic pair.
  std::vector<std::vector<Rir>> rirs(sources);
  Eigen::Index max_taps = 1;
  for (std::size_t s = 0; s < sources; ++s) {
    for (Eigen::Index m = 0; m < channels; ++m) {
      rirs[s].push_back(simulate_rir(scene.room, positions[s], mics.col(m), rir_options));
      max_taps = std::max(max_taps, rirs[s].back().taps.size());
    }
  }
  const std::size_t nfft =
      next_pow2(static_cast<std::size_t>(length + max_taps - 1));
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Eigen::MatrixXd target = Eigen::MatrixXd::Zero(channels, length);
  Eigen::MatrixXd interference = Eigen::MatrixXd::Zero(channels, length);
  for (std::size_t s = 0; s < sources; ++s) {
    if (s > 0 && dry[s].isZero(0.0)) continue;
    const std::vector<Complex> source_spec = real_spectrum(fft, dry[s], nfft);
    for (Eigen::Index m = 0; m < channels; ++m) {
      const Eigen::VectorXd image = convolve_spectra(
          fft, source_spec, real_spectrum(fft, rirs[s][m].taps, nfft), nfft, length);
      if (s == 0)
        target.row(m) = image.transpose();
      else
        interference.row(m) += image.transpose();
    }
  }

  if (options.add_noise) {
    std::mt19937_64 rng(scene.noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd noise(channels, length);
    for (Eigen::Index t = 0; t < length; ++t)
      for (Eigen::Index m = 0; m < channels; ++m) noise(m, t) = gauss(rng);
    const double wanted = mean_power(target) / std::pow(10.0, scene.noise_snr_db / 10.0);
    noise *= std::sqrt(wanted / mean_power(noise));
    interference += noise;
  }

  Eigen::MatrixXd mixture = target + interference;
  return {AudioBuffer(std::move(mixture)), AudioBuffer(std::move(target)),
          AudioBuffer(std::move(interference))};
}

}  // namespace bandbeam
