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

#ifndef BANDBEAM_ROOM_HPP_
#define BANDBEAM_ROOM_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandbeam/audio.hpp"
#include "bandbeam/geometry.hpp"

namespace bandbeam {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

/// Shoebox room with one frequency-independent absorption on all walls.
/// How the uniform wall reflection coefficient follows from T60.
enum class AbsorptionModel {
  kSabine,        // sqrt(1 - Sabine absorption)
  kDecayMatched,  // tuned so the image lattice decays at the requested T60
};

struct Room {
  Eigen::Vector3d dims = Eigen::Vector3d(4.0, 6.0, 3.0);  // length, width, height (m)
  double t60 = 0.3;                                       // s
  AbsorptionModel absorption = AbsorptionModel::kDecayMatched;

  double volume() const { return dims.prod(); }
  double surface() const {
    return 2.0 * (dims.x() * dims.y() + dims.x() * dims.z() + dims.y() * dims.z());
  }
  bool contains(const Eigen::Vector3d& p, double margin = 0.0) const {
    return (p.array() > margin).all() && (p.array() < dims.array() - margin).all();
  }
};

/// Sabine absorption 0.1611 V / (S T60), clipped to at most 0.99. Throws
/// "infeasible T60" when the raw value reaches 1.
double absorption_from_t60(const Room& room);

/// Pressure reflection coefficient sqrt(1 - absorption).
double reflection_from_t60(const Room& room);

/// Reflection coefficient whose image-source energy decay has the room's T60.
///
/// Sabine's diffuse-field estimate overstates the decay rate of a shoebox
/// image lattice: paths grazing the long axes reflect rarely and dominate the
/// tail, so flat or elongated rooms ring up to ~30% longer than requested.
/// Here the late energy envelope is modelled as a direction average of
/// exp(2 ln(beta) c t sum_i |u_i| / D_i) over the unit sphere, its Schroeder
/// curve is fitted between -5 and -25 dB over the first T60 seconds, and beta
/// is iterated until the fitted decay time equals T60. Throws "infeasible T60"
/// under the same condition as absorption_from_t60().
double decay_matched_reflection(const Room& room, double c = kSpeedOfSound);

/// The reflection coefficient selected by room.absorption.
double wall_reflection(const Room& room, double c = kSpeedOfSound);

/// Smallest reflection order whose images cover every path no longer than
/// c * T60.
int default_max_order(const Room& room, double c = kSpeedOfSound);

struct ImageArrival {
  Eigen::Vector3d position;  // image source (m)
  double distance = 0.0;     // m
  double delay = 0.0;        // samples
  double amplitude = 0.0;    // reflection^order / (4 pi distance)
  int order = 0;
};

struct RirOptions {
  std::optional<int> max_order;       // default_max_order() when unset
  std::optional<Eigen::Index> length; // ceil(T60 fs) + kernel when unset
  double sample_rate = kSampleRate;
  double speed_of_sound = kSpeedOfSound;
  // Two-pole, two-zero DC-blocking filter (Allen and Berkley) at 100 Hz.
  // Every image arrives with positive amplitude, so without it the low end
  // of the response accumulates a slowly decaying offset.
  bool highpass = true;
};

/// In-place DC-blocking high-pass used by simulate_rir().
void highpass_rir(Eigen::VectorXd& taps, double sample_rate, double cutoff_hz = 100.0);

/// Image sources of a shoebox room up to `max_order` reflections, sorted by
/// delay then order. Arrivals later than `max_delay` samples are dropped.
std::vector<ImageArrival> image_sources(const Room& room,
                                        const Eigen::Vector3d& source,
                                        const Eigen::Vector3d& mic, int max_order,
                                        double max_delay,
                                        double sample_rate = kSampleRate,
                                        double c = kSpeedOfSound);

inline constexpr int kFractionalDelayTaps = 81;

/// Adds `amplitude * sinc(t - delay)` under an 81-tap Hann window centred on
/// `delay`. Taps outside [0, taps.size()) are dropped.
void add_fractional_impulse(Eigen::Ref<Eigen::VectorXd> taps, double delay,
                            double amplitude);

struct Rir {
  Eigen::VectorXd taps;
  double sample_rate = kSampleRate;
  double direct_path_delay = 0.0;  // samples
};

Rir simulate_rir(const Room& room, const Eigen::Vector3d& source,
                 const Eigen::Vector3d& mic, const RirOptions& options = {});

struct SourceSpec {
  double azimuth = 0.0;   // rad, relative to the array's forward axis
  double distance = 0.0;  // m, horizontal
  double height = 1.5;    // m
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // room coordinates
  std::string utterance_id;
};

inline constexpr int kInterfererCount = 5;
inline constexpr double kSectorStartDeg = 20.0;
inline constexpr double kSectorEndDeg = 340.0;

struct Scene {
  std::string id;
  std::uint64_t seed = 0;
  Room room;
  ArrayPose pose;
  MicArray array;
  SourceSpec target;
  std::vector<SourceSpec> interferers;
  double noise_snr_db = 30.0;
  std::uint64_t noise_seed = 0;
  int max_order = 0;

  /// Throws if a source or microphone lies outside the room or the
  /// interferer layout breaks the one-per-sector rule.
  void validate() const;
};

/// Sector index in [0, 5) of a relative azimuth, or -1 outside [20, 340] deg.
int interferer_sector(double azimuth_rad);

/// Draws room, pose, target and interferers. Utterance ids stay empty.
Scene sample_scene(std::mt19937_64& rng, const MicArray& array);
Scene sample_scene(std::uint64_t seed, const MicArray& array);

struct RenderOptions {
  bool add_noise = true;
  bool normalize_sources = true;  // scale each nonzero dry source to unit RMS
  RirOptions rir;                 // max_order overridden by scene.max_order
};

struct RenderedScene {
  AudioBuffer mixture;       // X: target image + interference
  AudioBuffer target_image;  // Y: target convolved with its RIRs
  AudioBuffer interference;  // V: interferer images + sensor noise
};

/// `utterances[0]` is the target, the rest follow scene.interferers. All are
/// cut or zero-padded to the target length.
RenderedScene render_mixture(const Scene& scene,
                             const std::vector<AudioBuffer>& utterances,
                             const RenderOptions& options = {});

/// Linear convolution of `signal` with `kernel`, truncated to `length`.
Eigen::VectorXd fft_convolve(const Eigen::VectorXd& signal,
                             const Eigen::VectorXd& kernel, Eigen::Index length);

}  // namespace bandbeam

#endif  // BANDBEAM_ROOM_HPP_
