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

#include "bandbeam/corpus.hpp"

#include <algorithm>

#include "json.hpp"

#include "bandbeam/wav.hpp"

namespace bandbeam {

const CorpusEntry& CorpusManifest::find(const std::string& id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const CorpusEntry& e, const std::string& key) {
                               return e.id < key;
                             });
  if (it == entries.end() || it->id != id)
    throw Error("utterance '" + id + "' not in corpus");
  return *it;
}

AudioBuffer CorpusManifest::load(const std::string& id) const {
  return read_wav(find(id).path, 16000);
}

CorpusManifest ingest_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("corpus directory " + dir.string() + " not found");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") files.push_back(entry.path());
  }
  if (files.empty()) throw Error("empty corpus");
  std::sort(files.begin(), files.end());

  CorpusManifest manifest;
  manifest.root = dir;
  for (const fs::path& path : files) {
    try {
      const WavInfo info = read_wav_info(path);
      if (info.sample_rate != 16000) {
        manifest.rejects.push_back(
            {path, "sample rate " + std::to_string(info.sample_rate) + " Hz, expected 16000 Hz"});
        continue;
      }
      if (info.channels != 1) {
        manifest.rejects.push_back(
            {path, std::to_string(info.channels) + " channels, expected mono"});
        continue;
      }
      const AudioBuffer audio = read_wav(path, 16000);
      if (!(audio.samples().squaredNorm() > 0.0)) {
        manifest.rejects.push_back({path, "zero power"});
        continue;
      }
      fs::path rel = fs::relative(path, dir);
      rel.replace_extension();
      CorpusEntry e;
      e.id = rel.generic_string();
      e.path = path;
      e.duration_s = static_cast<double>(audio.length()) / audio.sample_rate();
      const fs::path parent = rel.parent_path();
      e.speaker = parent.empty() ? std::string() : parent.filename().string();
      manifest.entries.push_back(std::move(e));
    } catch (const Error& err) {
      manifest.rejects.push_back({path, err.what()});
    }
  }
  if (manifest.entries.empty())
    throw Error("no usable utterances in " + dir.string() + " (" +
                std::to_string(manifest.rejects.size()) + " rejected)");
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.id < b.id; });
  return manifest;
}

std::string corpus_to_json(const CorpusManifest& manifest) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["root"] = manifest.root.generic_string();
  ordered_json entries = ordered_json::array();
  for (const CorpusEntry& e : manifest.entries)
    entries.push_back({{"id", e.id},
                       {"path", e.path.generic_string()},
                       {"duration_s", e.duration_s},
                       {"speaker", e.speaker}});
  doc["entries"] = entries;
  ordered_json rejects = ordered_json::array();
  for (const CorpusReject& r : manifest.rejects)
    rejects.push_back({{"path", r.path.generic_string()}, {"reason", r.reason}});
  doc["rejects"] = rejects;
  return doc.dump(2) + "\n";
}

}  // namespace bandbeam
