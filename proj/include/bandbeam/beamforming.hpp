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

#ifndef BANDBEAM_BEAMFORMING_HPP_
#define BANDBEAM_BEAMFORMING_HPP_

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandbeam/audio.hpp"
#include "bandbeam/geometry.hpp"
#include "bandbeam/room.hpp"

namespace bandbeam {

/// Far-field steering vector a_l = exp(-j 2 pi f tau_l), tau_l = -(u . p_l) / c,
/// for mic positions `mics_m` (metres, one column per mic) and unit
/// direction `u`.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> steering_vector(
    const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& mics_m,
    const Eigen::Matrix<Scalar, 3, 1>& direction, Scalar freq,
    Scalar c = Scalar(kSpeedOfSound)) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau =
      -(direction.transpose() * mics_m).transpose() / c;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  return (tau.array() * (-two_pi * freq))
      .unaryExpr([](Scalar phase) { return std::polar(Scalar(1), phase); })
      .matrix();
}

/// Delay-and-sum weights w = a / L at one frequency, so w^H a = 1.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> das_weight_vector(
    const Eigen::Matrix<Scalar, 3, Eigen::Dynamic>& mics_m,
    const Eigen::Matrix<Scalar, 3, 1>& direction, Scalar freq,
    Scalar c = Scalar(kSpeedOfSound)) {
  return steering_vector<Scalar>(mics_m, direction, freq, c) /
         Scalar(mics_m.cols());
}

/// Per-bin DAS weights, bins x L, for bin frequencies k * bin_width.
/// Throws if `direction` is not a unit vector.
Eigen::MatrixXcd das_weights(const MicArray& array, const Eigen::Vector3d& direction,
                             const StftConfig& config = {},
                             double c = kSpeedOfSound,
                             double sample_rate = kSampleRate);

/// out(k, i) = w(k)^H X(k, i). `weights` is bins x L.
Spectrogram apply_beamformer(const Eigen::MatrixXcd& weights, const Spectrogram& spec);

/// D-channel beamformer output with one label per channel.
struct BeamSpectrogram {
  Spectrogram spec;
  std::vector<std::string> labels;

  Eigen::Index beam_count() const { return spec.channel_count(); }
  Eigen::Index index_of(const std::string& label) const;
};

/// Fixed DAS beams steered in the array's own frame.
struct BeamformerBank {
  std::string array_name;
  std::vector<std::string> labels;
  std::vector<Eigen::Vector3d> directions;
  std::vector<Eigen::MatrixXcd> weights;  // one bins x L matrix per beam
  StftConfig config;
  double speed_of_sound = kSpeedOfSound;

  Eigen::Index beam_count() const { return static_cast<Eigen::Index>(weights.size()); }
  Eigen::Index index_of(const std::string& label) const;
};

/// Front (+x), back (-x), left (+y), right (-y), computed from the array's
/// microphone positions.
BeamformerBank build_bank(const MicArray& array, const StftConfig& config = {},
                          double c = kSpeedOfSound);

BeamSpectrogram apply_bank(const BeamformerBank& bank, const Spectrogram& spec);

/// |w^H a(theta)| over horizontal azimuths (rad, array frame) at `freq`.
Eigen::VectorXd directivity(const Eigen::VectorXcd& weights, const MicArray& array,
                            double freq, const Eigen::VectorXd& azimuths,
                            double c = kSpeedOfSound);

/// Gain curve of a DAS beam steered to `direction`, weights evaluated at `freq`.
Eigen::VectorXd beam_pattern(const MicArray& array, const Eigen::Vector3d& direction,
                             double freq, const Eigen::VectorXd& azimuths,
                             double c = kSpeedOfSound);

/// Full width (deg) of the main lobe where gain stays above 1/sqrt(2),
/// scanned in `step_deg` increments around the steering azimuth. 360 when
/// the gain never falls below the threshold.
double main_lobe_width_deg(const MicArray& array, const Eigen::Vector3d& direction,
                           double freq, double step_deg = 0.1,
                           double c = kSpeedOfSound);

/// Bank export: directions plus per-bin weights as JSON text.
std::string bank_to_json(const BeamformerBank& bank);

}  // namespace bandbeam

#endif  // BANDBEAM_BEAMFORMING_HPP_
