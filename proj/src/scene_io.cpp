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

#include "bandbeam/scene_io.hpp"

#include <fstream>

namespace bandbeam {
namespace {

using nlohmann::json;

json vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error("scene manifest: expected a 3-vector");
  return {v[0], v[1], v[2]};
}

json source_json(const SourceSpec& s) {
  return {{"azimuth_rad", s.azimuth},
          {"distance_m", s.distance},
          {"height_m", s.height},
          {"position_m", vec3(s.position)},
          {"utterance_id", s.utterance_id}};
}

SourceSpec source_from(const json& j) {
  SourceSpec s;
  s.azimuth = j.at("azimuth_rad").get<double>();
  s.distance = j.at("distance_m").get<double>();
  s.height = j.at("height_m").get<double>();
  s.position = vec3(j.at("position_m"));
  s.utterance_id = j.at("utterance_id").get<std::string>();
  return s;
}

std::string absorption_model_name(AbsorptionModel m) {
  return m == AbsorptionModel::kSabine ? "sabine" : "decay_matched";
}

AbsorptionModel parse_absorption_model(const std::string& name) {
  if (name == "sabine") return AbsorptionModel::kSabine;
  if (name == "decay_matched") return AbsorptionModel::kDecayMatched;
  throw Error("scene manifest: unknown absorption_model '" + name + "'");
}

}  // namespace

json scene_to_json(const Scene& scene) {
  json doc;
  doc["format"] = "bandbeam-scene";
  doc["version"] = 1;
  doc["id"] = scene.id;
  doc["seed"] = scene.seed;
  doc["room"] = {{"dims_m", vec3(scene.room.dims)},
                 {"t60_s", scene.room.t60},
                 {"absorption_model", absorption_model_name(scene.room.absorption)},
                 {"reflection", wall_reflection(scene.room)}};
  doc["pose"] = {{"center_m", vec3(scene.pose.center)}, {"yaw_rad", scene.pose.yaw}};
  doc["array"] = json::parse(geometry_to_json({scene.array}))["arrays"][0];
  doc["target"] = source_json(scene.target);
  json interferers = json::array();
  for (const SourceSpec& s : scene.interferers) interferers.push_back(source_json(s));
  doc["interferers"] = interferers;
  doc["noise_snr_db"] = scene.noise_snr_db;
  doc["noise_seed"] = scene.noise_seed;
  doc["max_order"] = scene.max_order;
  doc["speed_of_sound"] = kSpeedOfSound;
  doc["sample_rate"] = kSampleRate;
  return doc;
}

Scene scene_from_json(const json& doc) {
  if (doc.value("format", "") != "bandbeam-scene")
    throw Error("scene manifest: missing format tag 'bandbeam-scene'");
  Scene scene;
  try {
    scene.id = doc.at("id").get<std::string>();
    scene.seed = doc.at("seed").get<std::uint64_t>();
    scene.room.dims = vec3(doc.at("room").at("dims_m"));
    scene.room.t60 = doc.at("room").at("t60_s").get<double>();
    scene.room.absorption =
        parse_absorption_model(doc.at("room").value("absorption_model", "decay_matched"));
    scene.pose.center = vec3(doc.at("pose").at("center_m"));
    scene.pose.yaw = doc.at("pose").at("yaw_rad").get<double>();
    json geometry = {{"format", "bandbeam-geometry"},
                     {"version", 1},
                     {"arrays", json::array({doc.at("array")})}};
    scene.array = geometry_from_json(geometry.dump()).front();
    scene.target = source_from(doc.at("target"));
    for (const json& j : doc.at("interferers")) scene.interferers.push_back(source_from(j));
    scene.noise_snr_db = doc.at("noise_snr_db").get<double>();
    scene.noise_seed = doc.at("noise_seed").get<std::uint64_t>();
    scene.max_order = doc.at("max_order").get<int>();
  } catch (const json::exception& e) {
    throw Error(std::string("scene manifest: ") + e.what());
  }
  scene.validate();
  return scene;
}

void save_scene_manifest(const std::filesystem::path& path, const Scene& scene,
                         const json& extra) {
  json doc = scene_to_json(scene);
  if (extra.is_object())
    for (const auto& [key, value] : extra.items()) doc[key] = value;
  std::ofstream out(path);
  if (!out) throw Error("cannot write scene manifest " + path.string());
  out << doc.dump(2) << "\n";
}

Scene load_scene_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("scene manifest " + path.string() + ": " + e.what());
  }
  return scene_from_json(doc);
}

}  // namespace bandbeam
