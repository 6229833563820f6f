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

#include "bandbeam/hybrid.hpp"

#include <cmath>
#include <string>

namespace bandbeam {

InputKind input_kind(Variant v) {
  switch (v) {
    case Variant::kBaseline1: return InputKind::kMics;
    case Variant::kBaseline2: return InputKind::kBeams;
    case Variant::kHybrid1: return InputKind::kBeams;
    case Variant::kHybrid2: return InputKind::kBandwise;
    case Variant::kHybrid3: return InputKind::kBandwise;
  }
  throw Error("unknown variant");
}

ReferenceKind reference_kind(Variant v) {
  switch (v) {
    case Variant::kBaseline1: return ReferenceKind::kFrontalMic;
    case Variant::kBaseline2: return ReferenceKind::kForwardBeam;
    case Variant::kHybrid1: return ReferenceKind::kFrontalMic;
    case Variant::kHybrid2: return ReferenceKind::kForwardBeam;
    case Variant::kHybrid3: return ReferenceKind::kFrontalMic;
  }
  throw Error("unknown variant");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline1: return "Baseline1";
    case Variant::kBaseline2: return "Baseline2";
    case Variant::kHybrid1: return "Hybrid1";
    case Variant::kHybrid2: return "Hybrid2";
    case Variant::kHybrid3: return "Hybrid3";
  }
  throw Error("unknown variant");
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (variant_name(v) == name) return v;
  throw Error("unknown variant '" + std::string(name) + "'");
}

Eigen::Index cutoff_bin(double cutoff_hz, const StftConfig& config, double sample_rate) {
  if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0))
    throw Error("cutoff frequency must lie strictly between 0 and Nyquist");
  return static_cast<Eigen::Index>(std::floor(cutoff_hz / config.bin_width(sample_rate) + 0.5));
}

HybridInput assemble_bandwise(const Spectrogram& mic_spec,
                              const BeamSpectrogram& beam_spec, Eigen::Index cutoff) {
  const Spectrogram& beams = beam_spec.spec;
  if (mic_spec.channel_count() != beams.channel_count())
    throw Error("channel-count mismatch: " + std::to_string(mic_spec.channel_count()) +
                " mics vs " + std::to_string(beams.channel_count()) + " beams");
  if (mic_spec.bins() != beams.bins() || mic_spec.frames() != beams.frames())
    throw Error("mic and beam spectrograms differ in bins or frames");
  if (cutoff < 0 || cutoff > mic_spec.bins()) throw Error("cutoff bin out of range");

  std::vector<Eigen::MatrixXcd> out;
  out.reserve(mic_spec.channel_count());
  for (Eigen::Index c = 0; c < mic_spec.channel_count(); ++c) {
    Eigen::MatrixXcd data(mic_spec.bins(), mic_spec.frames());
    data.topRows(cutoff) = mic_spec.channel(c).topRows(cutoff);
    data.bottomRows(data.rows() - cutoff) = beams.channel(c).bottomRows(data.rows() - cutoff);
    out.push_back(std::move(data));
  }
  HybridInput hybrid{Spectrogram(std::move(out), mic_spec.config(), mic_spec.sample_rate()),
                     cutoff,
                     {}};
  if (cutoff > 0) hybrid.provenance.push_back({{0, cutoff}, BinSource::kMics});
  if (cutoff < mic_spec.bins())
    hybrid.provenance.push_back({{cutoff, mic_spec.bins()}, BinSource::kBeams});
  return hybrid;
}

Spectrogram select_reference(const ModelConfig& config, const Spectrogram& mic_spec,
                             const BeamSpectrogram& beam_spec, const MicArray& array) {
  if (config.reference() == ReferenceKind::kFrontalMic) {
    if (mic_spec.channel_count() != array.size())
      throw Error("mic spectrogram does not match the array");
    return mic_spec.select_channel(frontal_mic_index(array));
  }
  return beam_spec.spec.select_channel(beam_spec.index_of("front"));
}

Spectrogram build_model_input(const ModelConfig& config, const Spectrogram& mic_spec,
                              const BeamSpectrogram& beam_spec) {
  switch (config.input()) {
    case InputKind::kMics: return mic_spec;
    case InputKind::kBeams: return beam_spec.spec;
    case InputKind::kBandwise:
      return assemble_bandwise(mic_spec, beam_spec,
                               cutoff_bin(config.cutoff_hz, mic_spec.config(),
                                          mic_spec.sample_rate()))
          .data;
  }
  throw Error("unknown input kind");
}

}  // namespace bandbeam
