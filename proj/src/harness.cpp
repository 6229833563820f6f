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

#include "bandbeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "bandbeam/beamforming.hpp"
#include "bandbeam/scene_io.hpp"
#include "bandbeam/wav.hpp"

namespace bandbeam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kUtteranceStream = 0x7574746572616e63ULL;

struct Task {
  std::size_t array_index;
  std::size_t scene_index;
};

std::vector<Task> tasks_for(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < config.arrays.size(); ++a)
    for (int s = 0; s < config.scenes_per_array; ++s)
      tasks.push_back({a, static_cast<std::size_t>(s)});
  return tasks;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

fs::path experiment_dir(const ExperimentConfig& config) {
  return config.output_dir / config.name;
}

fs::path scene_dir(const ExperimentConfig& config, const std::string& array,
                   std::size_t scene_index) {
  return experiment_dir(config) / array / scene_id(array, scene_index);
}

std::string records_csv(const std::vector<UtteranceRecord>& records, const BandSpec& bands) {
  MetricsReport r;
  r.bands = bands;
  r.records = records;
  return report_csv(r);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json manifest_extra(const ExperimentConfig& config, const ArraySelection& selection,
                    const Scene& scene, const CorpusManifest& corpus) {
  json utterances = json::object();
  auto add = [&](const std::string& id) {
    utterances[id] = corpus.find(id).path.generic_string();
  };
  add(scene.target.utterance_id);
  for (const SourceSpec& s : scene.interferers) add(s.utterance_id);
  return {{"experiment", config.name},
          {"array_group", selection.group},
          {"split", selection.split},
          {"max_duration_s", config.max_duration_s},
          {"corpus_root", corpus.root.generic_string()},
          {"utterance_paths", utterances}};
}

UtteranceRecord base_record(const ArraySelection& selection, const Scene& scene,
                            std::string variant) {
  UtteranceRecord r;
  r.scene_id = scene.id;
  r.array = selection.name;
  r.array_group = selection.group;
  r.split = selection.split;
  r.variant = std::move(variant);
  return r;
}

UtteranceRecord score(const ExperimentConfig& config, UtteranceRecord r,
                      const AudioBuffer& estimate, const AudioBuffer& reference) {
  try {
    r.si_sdr_db = si_sdr(estimate, reference);
    r.band_si_sdr_db = bandwise_si_sdr(estimate, reference, config.bands);
  } catch (const Error& e) {
    r.ok = false;
    r.message = e.what();
  }
  return r;
}

AudioBuffer load_utterance(const CorpusManifest& corpus, const std::string& id,
                           double max_duration_s) {
  AudioBuffer audio = corpus.load(id);
  const auto cap = static_cast<Eigen::Index>(std::lround(max_duration_s * audio.sample_rate()));
  if (cap > 0 && audio.length() > cap) audio = audio.truncated(cap);
  return audio;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw Error("experiment name must not be empty");
  if (arrays.empty()) throw Error("experiment selects no arrays");
  if (scenes_per_array < 1) throw Error("scenes_per_array must be at least 1");
  if (variants.empty()) throw Error("experiment selects no variants");
  if (!(max_duration_s > 0.0)) throw Error("max_duration_s must be positive");
  if (max_order && *max_order < 0) throw Error("max_order must be non-negative");
  if (mask_source == MaskSource::kExternal && mask_dir.empty())
    throw Error("external masks need mask_dir");
  if (jobs < 1) throw Error("jobs must be at least 1");
  cutoff_bin(cutoff_hz);
  bands.validate();
  for (std::size_t i = 0; i < arrays.size(); ++i)
    for (std::size_t j = i + 1; j < arrays.size(); ++j)
      if (arrays[i].name == arrays[j].name)
        throw Error("array '" + arrays[i].name + "' selected twice");
}

std::string standard_array_group(const std::string& name) {
  if (name == "0") return "Ref";
  if (name == "0a" || name == "0b" || name == "0c") return "Small";
  if (name == "0d" || name == "0e" || name == "0f") return "Large";
  return "Other";
}

ExperimentConfig experiment1_preset() {
  ExperimentConfig c;
  c.name = "experiment1";
  for (const char* n : {"0", "0a", "0b", "0c", "0d", "0e", "0f"})
    c.arrays.push_back({n, standard_array_group(n), ""});
  return c;
}

ExperimentConfig experiment2_preset() {
  ExperimentConfig c;
  c.name = "experiment2";
  for (const char* n : {"0", "0a", "0b", "0c", "0d", "0e", "0f", "1", "2", "3", "4"}) {
    const std::string name = n;
    const bool unseen = name == "0c" || name == "1" || name == "4";
    c.arrays.push_back({name, standard_array_group(name), unseen ? "unseen" : "seen"});
  }
  return c;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    const std::string preset = doc.value("preset", "");
    if (preset == "experiment1")
      c = experiment1_preset();
    else if (preset == "experiment2")
      c = experiment2_preset();
    else if (!preset.empty())
      throw Error("unknown preset '" + preset + "'");

    if (doc.contains("name")) c.name = doc["name"].get<std::string>();
    if (doc.contains("corpus_dir")) c.corpus_dir = doc["corpus_dir"].get<std::string>();
    if (doc.contains("geometry_file")) c.geometry_file = doc["geometry_file"].get<std::string>();
    if (doc.contains("arrays")) {
      c.arrays.clear();
      for (const json& a : doc["arrays"]) {
        ArraySelection sel;
        if (a.is_string()) {
          sel.name = a.get<std::string>();
        } else {
          sel.name = a.at("name").get<std::string>();
          sel.group = a.value("group", "");
          sel.split = a.value("split", "");
        }
        if (sel.group.empty()) sel.group = standard_array_group(sel.name);
        c.arrays.push_back(sel);
      }
    }
    if (doc.contains("unseen")) {
      const auto unseen = doc["unseen"].get<std::vector<std::string>>();
      for (ArraySelection& a : c.arrays)
        a.split = std::find(unseen.begin(), unseen.end(), a.name) != unseen.end() ? "unseen"
                                                                                  : "seen";
    }
    if (doc.contains("scenes_per_array")) c.scenes_per_array = doc["scenes_per_array"].get<int>();
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("variants")) {
      c.variants.clear();
      for (const json& v : doc["variants"]) c.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (doc.contains("cutoff_hz")) c.cutoff_hz = doc["cutoff_hz"].get<double>();
    if (doc.contains("max_order")) {
      if (doc["max_order"].is_null())
        c.max_order.reset();
      else
        c.max_order = doc["max_order"].get<int>();
    }
    if (doc.contains("bands")) c.bands.edges = doc["bands"].get<std::vector<double>>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("max_duration_s")) c.max_duration_s = doc["max_duration_s"].get<double>();
    if (doc.contains("mask_clip")) c.mask_clip = doc["mask_clip"].get<double>();
    if (doc.contains("mask_source")) {
      const std::string src = doc["mask_source"].get<std::string>();
      if (src == "oracle")
        c.mask_source = MaskSource::kOracle;
      else if (src == "external")
        c.mask_source = MaskSource::kExternal;
      else
        throw Error("mask_source must be 'oracle' or 'external'");
    }
    if (doc.contains("mask_dir")) c.mask_dir = doc["mask_dir"].get<std::string>();
    if (doc.contains("save_audio")) c.save_audio = doc["save_audio"].get<bool>();
    if (doc.contains("jobs")) c.jobs = doc["jobs"].get<int>();
  } catch (const json::exception& e) {
    throw Error(std::string("experiment config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json arrays = json::array();
  for (const ArraySelection& a : c.arrays)
    arrays.push_back({{"name", a.name}, {"group", a.group}, {"split", a.split}});
  json variants = json::array();
  for (Variant v : c.variants) variants.push_back(std::string(variant_name(v)));
  json doc = {{"name", c.name},
              {"corpus_dir", c.corpus_dir.generic_string()},
              {"geometry_file", c.geometry_file.generic_string()},
              {"arrays", arrays},
              {"scenes_per_array", c.scenes_per_array},
              {"seed", c.seed},
              {"variants", variants},
              {"cutoff_hz", c.cutoff_hz},
              {"bands", c.bands.edges},
              {"output_dir", c.output_dir.generic_string()},
              {"max_duration_s", c.max_duration_s},
              {"mask_clip", c.mask_clip},
              {"mask_source", c.mask_source == MaskSource::kOracle ? "oracle" : "external"},
              {"mask_dir", c.mask_dir.generic_string()},
              {"save_audio", c.save_audio},
              {"jobs", c.jobs}};
  doc["max_order"] = c.max_order ? json(*c.max_order) : json(nullptr);
  return doc;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t scene_seed(std::uint64_t master, std::size_t array_index,
                         std::size_t scene_index) {
  return mix_seed(mix_seed(master) ^ mix_seed((std::uint64_t(array_index) << 32) |
                                              std::uint64_t(scene_index)));
}

std::string scene_id(const std::string& array, std::size_t scene_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%04zu", scene_index);
  return array + "-" + buf;
}

RenderedScene render_from_manifest(const Scene& scene, const CorpusManifest& corpus,
                                   double max_duration_s) {
  std::vector<AudioBuffer> utterances{
      load_utterance(corpus, scene.target.utterance_id, max_duration_s)};
  for (const SourceSpec& s : scene.interferers)
    utterances.push_back(load_utterance(corpus, s.utterance_id, max_duration_s));
  return render_mixture(scene, utterances);
}

GeneratedScene generate_scene(const ExperimentConfig& config, const CorpusManifest& corpus,
                              const MicArray& array, std::size_t array_index,
                              std::size_t scene_index) {
  const std::uint64_t seed = scene_seed(config.seed, array_index, scene_index);
  Scene scene = sample_scene(seed, array);
  scene.id = scene_id(array.name, scene_index);
  if (config.max_order) scene.max_order = *config.max_order;

  const std::size_t needed = 1 + scene.interferers.size();
  if (corpus.entries.size() < needed)
    throw Error("corpus has " + std::to_string(corpus.entries.size()) +
                " usable utterances; each scene needs " + std::to_string(needed));
  std::mt19937_64 rng(mix_seed(seed ^ kUtteranceStream));
  std::vector<std::size_t> order(corpus.entries.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < needed; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  scene.target.utterance_id = corpus.entries[order[0]].id;
  for (std::size_t i = 0; i < scene.interferers.size(); ++i)
    scene.interferers[i].utterance_id = corpus.entries[order[i + 1]].id;

  RenderedScene rendered = render_from_manifest(scene, corpus, config.max_duration_s);
  return {std::move(scene), std::move(rendered)};
}

std::vector<VariantOutput> enhance_scene(const ExperimentConfig& config, const Scene& scene,
                                         const RenderedScene& rendered) {
  const Eigen::Index length = rendered.mixture.length();
  const Spectrogram mic_spec = stft(rendered.mixture);
  const Spectrogram clean_spec = stft(rendered.target_image);
  const BeamformerBank bank = build_bank(scene.array, mic_spec.config());
  const BeamSpectrogram beams = apply_bank(bank, mic_spec);
  const BeamSpectrogram clean_beams = apply_bank(bank, clean_spec);

  std::vector<VariantOutput> outputs;
  for (Variant v : config.variants) {
    VariantOutput out;
    out.variant = v;
    const ModelConfig model{v, config.cutoff_hz};
    const Spectrogram reference = select_reference(model, mic_spec, beams, scene.array);
    const Spectrogram clean_ref = select_reference(model, clean_spec, clean_beams, scene.array);
    out.clean_ref = istft(clean_ref).truncated(length);
    try {
      const Spectrogram model_input = build_model_input(model, mic_spec, beams);
      if (config.mask_source == MaskSource::kOracle) {
        out.mask = OracleMaskProvider(clean_ref, config.mask_clip).produce(model_input, reference);
      } else {
        const fs::path path =
            config.mask_dir / scene.id / (std::string(variant_name(v)) + ".hbmk");
        if (!fs::exists(path)) throw Error("missing external mask " + path.string());
        out.mask = FileMaskProvider(path, config.mask_clip).produce(model_input, reference);
      }
      out.enhanced = istft(apply_mask(out.mask, reference)).truncated(length);
    } catch (const Error& e) {
      out.ok = false;
      out.message = e.what();
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

UtteranceRecord noisy_record(const ExperimentConfig& config, const ArraySelection& selection,
                             const Scene& scene, const AudioBuffer& mixture,
                             const AudioBuffer& target_image) {
  const Eigen::Index frontal = frontal_mic_index(scene.array);
  return score(config, base_record(selection, scene, "Noisy"),
               mixture.select_channel(frontal), target_image.select_channel(frontal));
}

std::vector<UtteranceRecord> evaluate_scene(const ExperimentConfig& config,
                                            const ArraySelection& selection,
                                            const Scene& scene,
                                            const RenderedScene& rendered,
                                            const std::vector<VariantOutput>& outputs) {
  std::vector<UtteranceRecord> records{
      noisy_record(config, selection, scene, rendered.mixture, rendered.target_image)};
  for (const VariantOutput& out : outputs) {
    UtteranceRecord r = base_record(selection, scene, std::string(variant_name(out.variant)));
    if (!out.ok) {
      r.ok = false;
      r.message = out.message;
      records.push_back(std::move(r));
      continue;
    }
    records.push_back(score(config, std::move(r), out.enhanced, out.clean_ref));
  }
  return records;
}

std::vector<Grouping> groupings_for(const ExperimentConfig& config) {
  std::vector<Grouping> g{Grouping::kArrayGroup};
  if (std::any_of(config.arrays.begin(), config.arrays.end(),
                  [](const ArraySelection& a) { return !a.split.empty(); }))
    g.push_back(Grouping::kSplit);
  g.push_back(Grouping::kAll);
  return g;
}

std::vector<MicArray> resolve_arrays(const ExperimentConfig& config) {
  const std::vector<MicArray> available = config.geometry_file.empty()
                                              ? standard_arrays()
                                              : load_geometry_file(config.geometry_file);
  std::vector<MicArray> out;
  for (const ArraySelection& sel : config.arrays) out.push_back(find_array(available, sel.name));
  return out;
}

void write_report(const fs::path& dir, const MetricsReport& report) {
  fs::create_directories(dir);
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "report.json", report_json(report));
}

namespace {

void save_variant_audio(const fs::path& dir, const std::vector<VariantOutput>& outputs,
                        bool masks) {
  fs::create_directories(dir / "enhanced");
  fs::create_directories(dir / "clean_ref");
  if (masks) fs::create_directories(dir / "masks");
  for (const VariantOutput& out : outputs) {
    const std::string name(variant_name(out.variant));
    write_wav(dir / "clean_ref" / (name + ".wav"), out.clean_ref);
    if (!out.ok) continue;
    write_wav(dir / "enhanced" / (name + ".wav"), out.enhanced);
    if (masks) save_mask(dir / "masks" / (name + ".hbmk"), out.mask);
  }
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const CorpusManifest corpus = ingest_corpus(config.corpus_dir);
  const std::vector<MicArray> arrays = resolve_arrays(config);
  const std::vector<Task> tasks = tasks_for(config);

  std::vector<std::vector<UtteranceRecord>> results(tasks.size());
  parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    const ArraySelection& sel = config.arrays[task.array_index];
    const fs::path dir = scene_dir(config, sel.name, task.scene_index);
    fs::create_directories(dir);
    const GeneratedScene gen = generate_scene(config, corpus, arrays[task.array_index],
                                              task.array_index, task.scene_index);
    save_scene_manifest(dir / "manifest.json", gen.scene,
                        manifest_extra(config, sel, gen.scene, corpus));
    const std::vector<VariantOutput> outputs = enhance_scene(config, gen.scene, gen.rendered);
    results[i] = evaluate_scene(config, sel, gen.scene, gen.rendered, outputs);
    write_text(dir / "metrics.csv", records_csv(results[i], config.bands));
    if (config.save_audio) {
      write_wav(dir / "mixture.wav", gen.rendered.mixture);
      write_wav(dir / "target_image.wav", gen.rendered.target_image);
      save_variant_audio(dir, outputs, true);
    }
  });

  std::vector<UtteranceRecord> records;
  for (auto& r : results) records.insert(records.end(), r.begin(), r.end());
  MetricsReport report =
      aggregate(config.name, std::move(records), config.bands, groupings_for(config));
  write_report(experiment_dir(config), report);
  return report;
}

void generate_dataset(const ExperimentConfig& config) {
  config.validate();
  const CorpusManifest corpus = ingest_corpus(config.corpus_dir);
  const std::vector<MicArray> arrays = resolve_arrays(config);
  const std::vector<Task> tasks = tasks_for(config);
  parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    const ArraySelection& sel = config.arrays[task.array_index];
    const fs::path dir = scene_dir(config, sel.name, task.scene_index);
    fs::create_directories(dir);
    const GeneratedScene gen = generate_scene(config, corpus, arrays[task.array_index],
                                              task.array_index, task.scene_index);
    save_scene_manifest(dir / "manifest.json", gen.scene,
                        manifest_extra(config, sel, gen.scene, corpus));
    write_wav(dir / "mixture.wav", gen.rendered.mixture);
    write_wav(dir / "target_image.wav", gen.rendered.target_image);
  });
}

namespace {

RenderedScene load_rendered(const fs::path& dir) {
  RenderedScene r{read_wav(dir / "mixture.wav"), read_wav(dir / "target_image.wav"), {}};
  if (r.mixture.channel_count() != r.target_image.channel_count() ||
      r.mixture.length() != r.target_image.length())
    throw Error(dir.string() + ": mixture and target image differ in shape");
  r.interference = AudioBuffer(r.mixture.samples() - r.target_image.samples());
  return r;
}

}  // namespace

void enhance_dataset(const ExperimentConfig& config) {
  config.validate();
  const std::vector<Task> tasks = tasks_for(config);
  parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    const fs::path dir = scene_dir(config, config.arrays[task.array_index].name, task.scene_index);
    const Scene scene = load_scene_manifest(dir / "manifest.json");
    const RenderedScene rendered = load_rendered(dir);
    save_variant_audio(dir, enhance_scene(config, scene, rendered), config.save_audio);
  });
}

MetricsReport evaluate_dataset(const ExperimentConfig& config) {
  config.validate();
  const std::vector<Task> tasks = tasks_for(config);
  std::vector<std::vector<UtteranceRecord>> results(tasks.size());
  parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
    const Task& task = tasks[i];
    const ArraySelection& sel = config.arrays[task.array_index];
    const fs::path dir = scene_dir(config, sel.name, task.scene_index);
    const Scene scene = load_scene_manifest(dir / "manifest.json");
    const RenderedScene rendered = load_rendered(dir);
    std::vector<UtteranceRecord> records{
        noisy_record(config, sel, scene, rendered.mixture, rendered.target_image)};
    for (Variant v : config.variants) {
      const std::string name(variant_name(v));
      UtteranceRecord r = base_record(sel, scene, name);
      const fs::path enhanced = dir / "enhanced" / (name + ".wav");
      const fs::path clean = dir / "clean_ref" / (name + ".wav");
      if (!fs::exists(enhanced) || !fs::exists(clean)) {
        r.ok = false;
        r.message = "missing enhanced output for " + name;
        records.push_back(std::move(r));
        continue;
      }
      records.push_back(score(config, std::move(r), read_wav(enhanced), read_wav(clean)));
    }
    write_text(dir / "metrics.csv", records_csv(records, config.bands));
    results[i] = std::move(records);
  });
  std::vector<UtteranceRecord> records;
  for (auto& r : results) records.insert(records.end(), r.begin(), r.end());
  MetricsReport report =
      aggregate(config.name, std::move(records), config.bands, groupings_for(config));
  write_report(experiment_dir(config), report);
  return report;
}

}  // namespace bandbeam
