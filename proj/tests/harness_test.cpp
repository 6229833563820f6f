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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "bandbeam/corpus.hpp"
#include "bandbeam/harness.hpp"
#include "bandbeam/scene_io.hpp"
#include "bandbeam/wav.hpp"

using namespace bandbeam;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("bandbeam_harness_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast configuration: short utterances and a low reflection order.
ExperimentConfig quick_config(const fs::path& root, const fs::path& corpus) {
  ExperimentConfig c = experiment1_preset();
  c.name = "quick";
  c.corpus_dir = corpus;
  c.output_dir = root / "out";
  c.scenes_per_array = 2;
  c.max_order = 2;
  c.max_duration_s = 0.5;
  return c;
}

const fs::path& shared_corpus() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("corpus");
    write_synthetic_corpus(d, 12, 0.6, 77, 4);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("corpus ingestion") {
  const fs::path empty = fresh_dir("empty");
  CHECK_THROWS_WITH(ingest_corpus(empty), "empty corpus");

  const fs::path one = fresh_dir("one");
  write_wav(one / "a.wav", synth_utterance(1, 0.5));
  const CorpusManifest m = ingest_corpus(one);
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0].id == "a");
  CHECK(m.entries[0].duration_s == doctest::Approx(0.5));
  CHECK(m.rejects.empty());

  write_wav(one / "fast.wav", AudioBuffer(synth_utterance(2, 0.5).samples(), 44100.0));
  write_wav(one / "stereo.wav", AudioBuffer(Eigen::MatrixXd::Ones(2, 800)));
  write_wav(one / "quiet.wav", AudioBuffer::zeros(1, 800));
  const CorpusManifest r = ingest_corpus(one);
  CHECK(r.entries.size() == 1);
  REQUIRE(r.rejects.size() == 3);
  bool named = false;
  for (const CorpusReject& rej : r.rejects)
    if (rej.path.filename() == "fast.wav") {
      named = true;
      CHECK(rej.reason.find("44100") != std::string::npos);
    }
  CHECK(named);
  CHECK(nlohmann::json::parse(corpus_to_json(r))["rejects"].size() == 3);

  const fs::path bad = fresh_dir("bad");
  write_wav(bad / "fast.wav", AudioBuffer(synth_utterance(2, 0.5).samples(), 44100.0));
  CHECK_THROWS(ingest_corpus(bad));
}

TEST_CASE("synthetic corpus is deterministic and speech-like") {
  const AudioBuffer a = synth_utterance(5, 1.0, 2), b = synth_utterance(5, 1.0, 2);
  CHECK(a.samples() == b.samples());
  CHECK(a.length() == 16000);
  CHECK(a.samples().cwiseAbs().maxCoeff() <= 1.0);
  CHECK(a.samples().squaredNorm() > 0.0);
  CHECK(synth_utterance(6, 1.0, 2).samples() != a.samples());
  const CorpusManifest m = ingest_corpus(shared_corpus());
  CHECK(m.entries.size() == 12);
  CHECK(m.entries[0].speaker.rfind("spk", 0) == 0);
}

TEST_CASE("presets") {
  const ExperimentConfig e1 = experiment1_preset();
  REQUIRE(e1.arrays.size() == 7);
  std::multiset<std::string> groups;
  for (const auto& a : e1.arrays) groups.insert(a.group);
  CHECK(groups.count("Ref") == 1);
  CHECK(groups.count("Small") == 3);
  CHECK(groups.count("Large") == 3);

  const ExperimentConfig e2 = experiment2_preset();
  REQUIRE(e2.arrays.size() == 11);
  std::set<std::string> unseen;
  for (const auto& a : e2.arrays)
    if (a.split == "unseen") unseen.insert(a.name);
  CHECK(unseen == std::set<std::string>{"0c", "1", "4"});
  CHECK(std::count_if(e2.arrays.begin(), e2.arrays.end(),
                      [](const ArraySelection& a) { return a.split == "seen"; }) == 8);
}

TEST_CASE("config files") {
  const ExperimentConfig c = config_from_json(nlohmann::json::parse(R"({
    "preset": "experiment2", "name": "mine", "scenes_per_array": 3, "seed": 9,
    "variants": ["Hybrid2", "Baseline1"], "cutoff_hz": 1000, "max_order": 4,
    "bands": [0, 1000, 8000], "unseen": ["2"]})"));
  CHECK(c.name == "mine");
  CHECK(c.arrays.size() == 11);
  CHECK(c.scenes_per_array == 3);
  CHECK(c.seed == 9);
  CHECK(c.variants == std::vector<Variant>{Variant::kHybrid2, Variant::kBaseline1});
  CHECK(c.cutoff_hz == 1000.0);
  CHECK(c.max_order == std::optional<int>(4));
  CHECK(c.bands.edges.size() == 3);
  for (const auto& a : c.arrays) CHECK(a.split == (a.name == "2" ? "unseen" : "seen"));

  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"preset": "nope"})")));
  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"variants": ["Hybrid9"]})")));
  CHECK_THROWS(config_from_json(nlohmann::json::parse(R"({"scenes_per_array": "x"})")));
  ExperimentConfig dup = experiment1_preset();
  dup.arrays.push_back(dup.arrays[0]);
  CHECK_THROWS(dup.validate());
  ExperimentConfig ext = experiment1_preset();
  ext.mask_source = MaskSource::kExternal;
  CHECK_THROWS(ext.validate());
}

TEST_CASE("seed derivation") {
  CHECK(mix_seed(0) != mix_seed(1));
  CHECK(scene_seed(1, 0, 0) == scene_seed(1, 0, 0));
  std::set<std::uint64_t> seeds;
  for (std::size_t a = 0; a < 11; ++a)
    for (std::size_t s = 0; s < 50; ++s) seeds.insert(scene_seed(2026, a, s));
  CHECK(seeds.size() == 550);
  CHECK(scene_seed(1, 0, 1) != scene_seed(2, 0, 1));
  CHECK(scene_id("0a", 3) == "0a-s0003");
}

TEST_CASE("scene manifests re-render the same scene") {
  const fs::path root = fresh_dir("closure");
  const ExperimentConfig c = quick_config(root, shared_corpus());
  const CorpusManifest corpus = ingest_corpus(c.corpus_dir);
  const MicArray array = find_array(standard_arrays(), "0d");
  const GeneratedScene gen = generate_scene(c, corpus, array, 4, 1);
  CHECK(gen.scene.id == "0d-s0001");
  std::set<std::string> ids{gen.scene.target.utterance_id};
  for (const auto& s : gen.scene.interferers) ids.insert(s.utterance_id);
  CHECK(ids.size() == 6);

  save_scene_manifest(root / "m.json", gen.scene, nlohmann::json::object());
  const Scene back = load_scene_manifest(root / "m.json");
  CHECK(back.id == gen.scene.id);
  CHECK(back.array.mics_mm == array.mics_mm);
  const RenderedScene again = render_from_manifest(back, corpus, c.max_duration_s);
  CHECK(again.mixture.samples() == gen.rendered.mixture.samples());
  CHECK(again.target_image.samples() == gen.rendered.target_image.samples());
}

TEST_CASE("oracle masks improve every variant on a generated scene") {
  const fs::path root = fresh_dir("oracle");
  ExperimentConfig c = quick_config(root, shared_corpus());
  c.max_duration_s = 0.6;
  const CorpusManifest corpus = ingest_corpus(c.corpus_dir);
  const GeneratedScene gen = generate_scene(c, corpus, nominal_array0(), 0, 0);
  const auto outputs = enhance_scene(c, gen.scene, gen.rendered);
  const auto records = evaluate_scene(c, c.arrays[0], gen.scene, gen.rendered, outputs);
  REQUIRE(records.size() == 6);
  CHECK(records[0].variant == "Noisy");
  for (std::size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].ok);
    CHECK(records[i].si_sdr_db > records[0].si_sdr_db);
    CHECK(records[i].band_si_sdr_db.size() == 5);
  }
}

TEST_CASE("experiment runs are deterministic across thread counts") {
  const fs::path root = fresh_dir("determinism");
  ExperimentConfig c = quick_config(root, shared_corpus());
  c.arrays.resize(3);
  c.output_dir = root / "a";
  const MetricsReport ra = run_experiment(c);
  c.output_dir = root / "b";
  c.jobs = 3;
  run_experiment(c);
  CHECK(slurp(root / "a" / "quick" / "report.csv") == slurp(root / "b" / "quick" / "report.csv"));
  CHECK(slurp(root / "a" / "quick" / "report.json") ==
        slurp(root / "b" / "quick" / "report.json"));
  CHECK(slurp(root / "a" / "quick" / "0a" / "0a-s0001" / "manifest.json") ==
        slurp(root / "b" / "quick" / "0a" / "0a-s0001" / "manifest.json"));
  CHECK(ra.records.size() == 3 * 2 * 6);
}

TEST_CASE("experiment-1 row counts per group") {
  const fs::path root = fresh_dir("rows");
  ExperimentConfig c = quick_config(root, shared_corpus());
  c.scenes_per_array = 10;
  c.max_order = 1;
  c.max_duration_s = 0.25;
  c.variants = {Variant::kHybrid2};
  const MetricsReport r = run_experiment(c);
  CHECK(r.find(Grouping::kArrayGroup, "Ref", "Hybrid2")->count == 10);
  CHECK(r.find(Grouping::kArrayGroup, "Small", "Hybrid2")->count == 30);
  CHECK(r.find(Grouping::kArrayGroup, "Large", "Hybrid2")->count == 30);
  CHECK(r.find(Grouping::kArrayGroup, "Ref", "Noisy")->count == 10);
  CHECK(fs::exists(root / "out" / "quick" / "0f" / "0f-s0009" / "metrics.csv"));
}

TEST_CASE("missing external masks become failed rows") {
  const fs::path root = fresh_dir("external");
  ExperimentConfig c = quick_config(root, shared_corpus());
  c.arrays.resize(1);
  c.scenes_per_array = 1;
  c.variants = {Variant::kBaseline1, Variant::kHybrid2};
  c.mask_source = MaskSource::kExternal;
  c.mask_dir = root / "masks";

  // Provide an all-ones mask for Baseline1 only.
  const CorpusManifest corpus = ingest_corpus(c.corpus_dir);
  const GeneratedScene gen = generate_scene(c, corpus, nominal_array0(), 0, 0);
  const Spectrogram mic = stft(gen.rendered.mixture);
  fs::create_directories(c.mask_dir / gen.scene.id);
  save_mask(c.mask_dir / gen.scene.id / "Baseline1.hbmk",
            {Eigen::MatrixXcd::Ones(mic.bins(), mic.frames())});

  set_warnings_enabled(false);
  const MetricsReport r = run_experiment(c);
  set_warnings_enabled(true);
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[1].variant == "Baseline1");
  CHECK(r.records[1].ok);
  // An identity mask returns the frontal mixture, so it scores as Noisy does up
  // to the resynthesis fade at the outermost samples.
  CHECK(std::abs(r.records[1].si_sdr_db - r.records[0].si_sdr_db) < 0.01);
  CHECK_FALSE(r.records[2].ok);
  CHECK(r.records[2].message.find("missing external mask") != std::string::npos);
  CHECK(slurp(root / "out" / "quick" / "report.csv").find("failed") != std::string::npos);
}

TEST_CASE("staged generation, enhancement and evaluation") {
  const fs::path root = fresh_dir("staged");
  ExperimentConfig c = quick_config(root, shared_corpus());
  c.arrays.resize(2);
  c.scenes_per_array = 1;
  c.save_audio = true;
  generate_dataset(c);
  CHECK(fs::exists(root / "out" / "quick" / "0" / "0-s0000" / "mixture.wav"));
  enhance_dataset(c);
  CHECK(fs::exists(root / "out" / "quick" / "0a" / "0a-s0000" / "enhanced" / "Hybrid2.wav"));
  CHECK(fs::exists(root / "out" / "quick" / "0a" / "0a-s0000" / "masks" / "Hybrid2.hbmk"));
  const MetricsReport staged = evaluate_dataset(c);
  CHECK(staged.records.size() == 2 * 6);
  for (const auto& r : staged.records) CHECK(r.ok);

  // The one-shot run agrees up to the float32 rounding of the staged WAV files.
  c.output_dir = root / "direct";
  const MetricsReport direct = run_experiment(c);
  for (std::size_t i = 0; i < direct.records.size(); ++i)
    CHECK(staged.records[i].si_sdr_db == doctest::Approx(direct.records[i].si_sdr_db).epsilon(1e-3));
}
