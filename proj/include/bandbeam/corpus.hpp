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

#ifndef BANDBEAM_CORPUS_HPP_
#define BANDBEAM_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bandbeam/audio.hpp"

namespace bandbeam {

struct CorpusEntry {
  std::string id;  // path relative to the corpus root, without extension
  std::filesystem::path path;
  double duration_s = 0.0;
  std::string speaker;  // parent directory name, empty at the root
};

struct CorpusReject {
  std::filesystem::path path;
  std::string reason;
};

struct CorpusManifest {
  std::filesystem::path root;
  std::vector<CorpusEntry> entries;  // sorted by id
  std::vector<CorpusReject> rejects;

  const CorpusEntry& find(const std::string& id) const;
  AudioBuffer load(const std::string& id) const;
};

/// Scans `dir` recursively for .wav files. Files that are not 16 kHz mono
/// with nonzero power go to `rejects` with a reason. Throws "empty corpus"
/// when no WAV file exists at all.
CorpusManifest ingest_corpus(const std::filesystem::path& dir);

std::string corpus_to_json(const CorpusManifest& manifest);

/// Speech-like test signal: syllables of formant-filtered glottal pulses
/// with fricative noise bursts and pauses. Deterministic in `seed`.
AudioBuffer synth_utterance(std::uint64_t seed, double seconds, int speaker = 0);

/// Writes `count` PCM16 utterances spread over `speakers` speaker
/// directories. Returns the written paths.
std::vector<std::filesystem::path> write_synthetic_corpus(
    const std::filesystem::path& dir, int count, double seconds, std::uint64_t seed,
    int speakers = 8);

}  // namespace bandbeam

#endif  // BANDBEAM_CORPUS_HPP_
