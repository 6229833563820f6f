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

#ifndef BANDBEAM_HARNESS_HPP_
#define BANDBEAM_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bandbeam/audio.hpp"
#include "bandbeam/corpus.hpp"
#include "bandbeam/geometry.hpp"
#include "bandbeam/hybrid.hpp"
#include "bandbeam/masking.hpp"
#include "bandbeam/metrics.hpp"
#include "bandbeam/room.hpp"

namespace bandbeam {

struct ArraySelection {
  std::string name;
  std::string group;  // Ref, Small, Large, Other
  std::string split;  // seen, unseen, or empty
};

enum class MaskSource { kOracle, kExternal };

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path corpus_dir;
  std::filesystem::path geometry_file;  // empty: built-in arrays
  std::vector<ArraySelection> arrays;
  int scenes_per_array = 10;
  std::uint64_t seed = 2026;
  std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
  double cutoff_hz = kDefaultCutoffHz;
  std::optional<int> max_order;  // per-room default when unset
  BandSpec bands;
  std::filesystem::path output_dir = "out";
  double max_duration_s = 3.0;
  double mask_clip = kDefaultMaskClip;
  MaskSource mask_source = MaskSource::kOracle;
  std::filesystem::path mask_dir;  // external masks: <mask_dir>/<scene>/<variant>.hbmk
  bool save_audio = false;
  int jobs = 1;

  void validate() const;
};

/// Ref / Small / Large / Other for the eleven standard array names.
std::string standard_array_group(const std::string& array_name);

/// Nominal-array training: evaluate 0 and 0a-0f grouped Ref/Small/Large.
ExperimentConfig experiment1_preset();
/// Multi-array training: all eleven arrays, 0c, 1 and 4 unseen.
ExperimentConfig experiment2_preset();

/// Config file (JSON). A "preset" key starts from experiment1/experiment2
/// and the remaining keys override it. Schema in docs/formats.md.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// splitmix64 finaliser; the basis of every derived seed.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed of scene `scene_index` for the array at `array_index` in the config.
std::uint64_t scene_seed(std::uint64_t master, std::size_t array_index,
                         std::size_t scene_index);
std::string scene_id(const std::string& array, std::size_t scene_index);

struct GeneratedScene {
  Scene scene;
  RenderedScene rendered;
};

/// Samples the scene, draws six distinct utterances and renders them.
GeneratedScene generate_scene(const ExperimentConfig& config, const CorpusManifest& corpus,
                              const MicArray& array, std::size_t array_index,
                              std::size_t scene_index);

/// Re-renders a scene from its manifest and the corpus.
RenderedScene render_from_manifest(const Scene& scene, const CorpusManifest& corpus,
                                   double max_duration_s);

struct VariantOutput {
  Variant variant;
  bool ok = true;
  std::string message;
  AudioBuffer enhanced;   // time domain, input length
  AudioBuffer clean_ref;  // clean target at the chosen reference
  Mask mask;
};

/// Runs every configured variant on one rendered scene: beamformer bank,
/// model input, reference selection, mask, inverse STFT. A missing or
/// malformed external mask yields a failed output, not an exception.
std::vector<VariantOutput> enhance_scene(const ExperimentConfig& config, const Scene& scene,
                                         const RenderedScene& rendered);

/// Noisy row plus one row per variant output.
std::vector<UtteranceRecord> evaluate_scene(const ExperimentConfig& config,
                                            const ArraySelection& selection,
                                            const Scene& scene,
                                            const RenderedScene& rendered,
                                            const std::vector<VariantOutput>& outputs);

/// Reference-channel record for the unprocessed mixture.
UtteranceRecord noisy_record(const ExperimentConfig& config, const ArraySelection& selection,
                             const Scene& scene, const AudioBuffer& mixture,
                             const AudioBuffer& target_image);

std::vector<Grouping> groupings_for(const ExperimentConfig& config);

/// Loads arrays named by the config from its geometry file (or built-ins).
std::vector<MicArray> resolve_arrays(const ExperimentConfig& config);

/// Whole pipeline. Writes scene manifests (and audio/masks with
/// save_audio) under output_dir/<name>/<array>/<scene>/ and the reports
/// output_dir/<name>/report.{csv,json}. Scenes run on `jobs` threads; the
/// result does not depend on the thread count.
MetricsReport run_experiment(const ExperimentConfig& config);

/// Staged variants of run_experiment used by the CLI.
void generate_dataset(const ExperimentConfig& config);
void enhance_dataset(const ExperimentConfig& config);
MetricsReport evaluate_dataset(const ExperimentConfig& config);

void write_report(const std::filesystem::path& dir, const MetricsReport& report);

}  // namespace bandbeam

#endif  // BANDBEAM_HARNESS_HPP_
