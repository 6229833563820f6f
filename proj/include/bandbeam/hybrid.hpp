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

#ifndef BANDBEAM_HYBRID_HPP_
#define BANDBEAM_HYBRID_HPP_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "bandbeam/audio.hpp"
#include "bandbeam/beamforming.hpp"
#include "bandbeam/geometry.hpp"

namespace bandbeam {

enum class Variant { kBaseline1, kBaseline2, kHybrid1, kHybrid2, kHybrid3 };
enum class InputKind { kMics, kBeams, kBandwise };
enum class ReferenceKind { kFrontalMic, kForwardBeam };

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::kBaseline1, Variant::kBaseline2, Variant::kHybrid1, Variant::kHybrid2,
    Variant::kHybrid3};

inline constexpr double kDefaultCutoffHz = 1500.0;

InputKind input_kind(Variant v);
ReferenceKind reference_kind(Variant v);

/// "Baseline1", "Baseline2", "Hybrid1", "Hybrid2", "Hybrid3".
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::kHybrid2;
  double cutoff_hz = kDefaultCutoffHz;

  InputKind input() const { return input_kind(variant); }
  ReferenceKind reference() const { return reference_kind(variant); }
};

/// k_c = round(f_c / bin_width), halves rounding up. Requires 0 < f_c < Nyquist.
Eigen::Index cutoff_bin(double cutoff_hz, const StftConfig& config = {},
                        double sample_rate = kSampleRate);

enum class BinSource { kMics, kBeams };

struct BandProvenance {
  BinRange bins;
  BinSource source;
};

/// Mic channels below the cutoff bin, beam channels from it upward.
struct HybridInput {
  Spectrogram data;
  Eigen::Index cutoff_bin = 0;
  std::vector<BandProvenance> provenance;
};

/// Throws "channel-count mismatch" unless the mic and beam spectrograms have
/// the same channel count.
HybridInput assemble_bandwise(const Spectrogram& mic_spec,
                              const BeamSpectrogram& beam_spec, Eigen::Index cutoff);

/// Frontal microphone channel or the beam labelled "front".
Spectrogram select_reference(const ModelConfig& config, const Spectrogram& mic_spec,
                             const BeamSpectrogram& beam_spec, const MicArray& array);

/// The multichannel tensor a mask estimator sees for this variant.
Spectrogram build_model_input(const ModelConfig& config, const Spectrogram& mic_spec,
                              const BeamSpectrogram& beam_spec);

}  // namespace bandbeam

#endif  // BANDBEAM_HYBRID_HPP_
