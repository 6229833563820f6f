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

#include "bandbeam/geometry.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bandbeam {
namespace {

using nlohmann::json;

constexpr int kGeometryFormatVersion = 1;

MicArray hand_array(std::string name,
                    std::initializer_list<std::array<double, 3>> mics) {
  MicArray a;
  a.name = std::move(name);
  a.mics_mm.resize(3, static_cast<Eigen::Index>(mics.size()));
  Eigen::Index i = 0;
  for (const auto& m : mics) a.mics_mm.col(i++) << m[0], m[1], m[2];
  return a;
}

}  // namespace

void MicArray::validate() const {
  if (size() < 1) throw Error("array '" + name + "' has no microphones");
  if (!mics_mm.allFinite())
    throw Error("array '" + name + "' has non-finite positions");
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = i + 1; j < size(); ++j)
      if ((mics_mm.col(i) - mics_mm.col(j)).norm() == 0.0)
        throw Error("array '" + name + "' has coincident microphones");
  if (std::abs(forward_axis.norm() - 1.0) > 1e-9)
    throw Error("array '" + name + "' forward axis is not a unit vector");
}

MicArray nominal_array0() {
  return hand_array("0", {{-29, 82, -5}, {30, -1, -1}, {11, -77, -2}, {-60, -83, -5}});
}

MicArray perturb(const MicArray& base, double lo_mm, double hi_mm,
                 std::mt19937_64& rng, std::string name) {
  if (!(lo_mm > 0.0) || hi_mm < lo_mm)
    throw Error("perturbation range must satisfy 0 < lo <= hi");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(lo_mm, hi_mm);

  MicArray out = base;
  out.name = name.empty() ? base.name + "~" : std::move(name);
  out.lineage = {base.name, std::nullopt, lo_mm, hi_mm};
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    Eigen::Vector3d dir;
    do {
      dir << gauss(rng), gauss(rng), gauss(rng);
    } while (dir.norm() < 1e-12);
    out.mics_mm.col(i) += radius(rng) * dir.normalized();
  }
  return out;
}

MicArray perturb(const MicArray& base, double lo_mm, double hi_mm,
                 std::uint64_t seed, std::string name) {
  std::mt19937_64 rng(seed);
  MicArray out = perturb(base, lo_mm, hi_mm, rng, std::move(name));
  out.lineage.seed = seed;
  return out;
}

Eigen::Matrix3Xd world_positions(const MicArray& array, const ArrayPose& pose) {
  return (yaw_rotation(pose.yaw) * array.mics_m()).colwise() + pose.center;
}

Eigen::Vector3d world_forward(const MicArray& array, const ArrayPose& pose) {
  return yaw_rotation(pose.yaw) * array.forward_axis;
}

Eigen::Index frontal_mic_index(const MicArray& array) {
  Eigen::Index best = 0;
  (array.forward_axis.transpose() * array.mics_mm).maxCoeff(&best);
  return best;
}

std::vector<MicArray> standard_arrays() {
  const MicArray base = nominal_array0();
  std::vector<MicArray> arrays{base};
  const char* small[] = {"0a", "0b", "0c"};
  const char* large[] = {"0d", "0e", "0f"};
  for (int i = 0; i < 3; ++i)
    arrays.push_back(perturb(base, 5.0, 10.0, std::uint64_t(1001 + i), small[i]));
  for (int i = 0; i < 3; ++i)
    arrays.push_back(perturb(base, 20.0, 40.0, std::uint64_t(1004 + i), large[i]));

  // Alternative layouts, not derived from array 0.
  arrays.push_back(hand_array(  // mics pushed back along the temples
      "1", {{22, 70, 0}, {22, -70, 0}, {-55, 76, -4}, {-55, -76, -4}}));
  arrays.push_back(hand_array(  // front-bar line array
      "2", {{36, 60, 6}, {40, 20, 8}, {40, -20, 8}, {36, -60, 6}}));
  arrays.push_back(hand_array(  // asymmetric, one deep temple mic
      "3", {{32, 64, 2}, {-12, 80, -9}, {24, -70, 1}, {-85, -78, -6}}));
  arrays.push_back(hand_array(  // compact bridge cluster
      "4", {{28, 14, 3}, {28, -14, 3}, {4, 26, -6}, {4, -26, -6}}));
  return arrays;
}

const MicArray& find_array(const std::vector<MicArray>& arrays,
                           const std::string& name) {
  auto it = std::find_if(arrays.begin(), arrays.end(),
                         [&](const MicArray& a) { return a.name == name; });
  if (it == arrays.end()) throw Error("unknown array '" + name + "'");
  return *it;
}

std::string geometry_to_json(const std::vector<MicArray>& arrays) {
  json doc;
  doc["format"] = "bandbeam-geometry";
  doc["version"] = kGeometryFormatVersion;
  doc["units"] = "mm";
  json list = json::array();
  for (const MicArray& a : arrays) {
    json entry;
    entry["name"] = a.name;
    entry["forward_axis"] = {a.forward_axis.x(), a.forward_axis.y(),
                             a.forward_axis.z()};
    json mics = json::array();
    for (Eigen::Index i = 0; i < a.size(); ++i)
      mics.push_back({a.mics_mm(0, i), a.mics_mm(1, i), a.mics_mm(2, i)});
    entry["mics_mm"] = mics;
    json prov;
    if (a.lineage.base.empty()) {
      prov["kind"] = "hand-specified";
    } else {
      prov["kind"] = "perturbed";
      prov["base"] = a.lineage.base;
      prov["magnitude_mm"] = {a.lineage.magnitude_lo_mm, a.lineage.magnitude_hi_mm};
      if (a.lineage.seed) prov["seed"] = *a.lineage.seed;
    }
    entry["provenance"] = prov;
    list.push_back(entry);
  }
  doc["arrays"] = list;
  return doc.dump(2) + "\n";
}

std::vector<MicArray> geometry_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("geometry file is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "bandbeam-geometry")
    throw Error("geometry file: missing format tag 'bandbeam-geometry'");
  if (doc.value("version", 0) != kGeometryFormatVersion)
    throw Error("geometry file: unsupported version");
  std::vector<MicArray> arrays;
  try {
    for (const json& entry : doc.at("arrays")) {
      MicArray a;
      a.name = entry.at("name").get<std::string>();
      const auto fwd = entry.at("forward_axis").get<std::vector<double>>();
      if (fwd.size() != 3) throw Error("array '" + a.name + "': bad forward_axis");
      a.forward_axis = Eigen::Vector3d(fwd[0], fwd[1], fwd[2]);
      const json& mics = entry.at("mics_mm");
      a.mics_mm.resize(3, static_cast<Eigen::Index>(mics.size()));
      for (std::size_t i = 0; i < mics.size(); ++i) {
        const auto p = mics[i].get<std::vector<double>>();
        if (p.size() != 3) throw Error("array '" + a.name + "': bad position");
        a.mics_mm.col(static_cast<Eigen::Index>(i)) << p[0], p[1], p[2];
      }
      if (entry.contains("provenance")) {
        const json& prov = entry["provenance"];
        if (prov.value("kind", "") == "perturbed") {
          a.lineage.base = prov.at("base").get<std::string>();
          const auto mag = prov.at("magnitude_mm").get<std::vector<double>>();
          if (mag.size() == 2) {
            a.lineage.magnitude_lo_mm = mag[0];
            a.lineage.magnitude_hi_mm = mag[1];
          }
          if (prov.contains("seed")) a.lineage.seed = prov["seed"].get<std::uint64_t>();
        }
      }
      a.validate();
      arrays.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("geometry file: ") + e.what());
  }
  for (std::size_t i = 0; i < arrays.size(); ++i)
    for (std::size_t j = i + 1; j < arrays.size(); ++j)
      if (arrays[i].name == arrays[j].name)
        throw Error("geometry file: duplicate array '" + arrays[i].name + "'");
  return arrays;
}

std::vector<MicArray> load_geometry_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open geometry file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return geometry_from_json(ss.str());
}

void save_geometry_file(const std::filesystem::path& path,
                        const std::vector<MicArray>& arrays) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write geometry file " + path.string());
  out << geometry_to_json(arrays);
}

std::filesystem::path default_geometry_path() {
  return std::filesystem::path(BANDBEAM_DATA_DIR) / "arrays.json";
}

}  // namespace bandbeam
