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

#ifndef BANDBEAM_SCENE_IO_HPP_
#define BANDBEAM_SCENE_IO_HPP_

#include <filesystem>

#include "json.hpp"

#include "bandbeam/room.hpp"

namespace bandbeam {

/// Scene manifest: every sampled value, seeds, utterance ids and the array
/// geometry, enough to re-render the scene without other inputs but the
/// corpus. Layout documented in docs/formats.md.
nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& doc);

void save_scene_manifest(const std::filesystem::path& path, const Scene& scene,
                         const nlohmann::json& extra = {});
Scene load_scene_manifest(const std::filesystem::path& path);

}  // namespace bandbeam

#endif  // BANDBEAM_SCENE_IO_HPP_
