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

#ifndef BANDBEAM_GEOMETRY_HPP_
#define BANDBEAM_GEOMETRY_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandbeam/audio.hpp"

namespace bandbeam {

/// Where a derived array came from. Empty base means hand-specified.
struct ArrayLineage {
  std::string base;
  std::optional<std::uint64_t> seed;
  double magnitude_lo_mm = 0.0;
  double magnitude_hi_mm = 0.0;
};

/// Point microphones in the array's own frame, millimetres, centred on the
/// array origin. The forward axis is +x for every shipped array.
struct MicArray {
  std::string name;
  Eigen::Matrix3Xd mics_mm;
  Eigen::Vector3d forward_axis = Eigen::Vector3d::UnitX();
  ArrayLineage lineage;

  Eigen::Index size() const { return mics_mm.cols(); }
  Eigen::Matrix3Xd mics_m() const { return mics_mm / 1000.0; }
  Eigen::Vector3d centroid_mm() const { return mics_mm.rowwise().mean(); }

  /// Throws if the array is empty, has non-finite or duplicate positions, or
  /// a non-unit forward axis.
  void validate() const;
};

/// Array centre in room coordinates (m) and rotation about +z (rad).
struct ArrayPose {
  Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 1.5);
  double yaw = 0.0;
};

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> yaw_rotation(Scalar yaw) {
  return Eigen::AngleAxis<Scalar>(yaw, Eigen::Matrix<Scalar, 3, 1>::UnitZ())
      .toRotationMatrix();
}

/// Array 0: four microphones on a glasses frame.
MicArray nominal_array0();

/// Displaces every microphone by an independent vector with norm uniform in
/// [lo_mm, hi_mm] and direction uniform on the sphere.
MicArray perturb(const MicArray& base, double lo_mm, double hi_mm,
                 std::mt19937_64& rng, std::string name = {});

/// Convenience overload seeding a fresh generator; records the seed.
MicArray perturb(const MicArray& base, double lo_mm, double hi_mm,
                 std::uint64_t seed, std::string name = {});

/// Room coordinates (m) of each microphone, one column per mic.
Eigen::Matrix3Xd world_positions(const MicArray& array, const ArrayPose& pose);

/// Forward axis expressed in room coordinates.
Eigen::Vector3d world_forward(const MicArray& array, const ArrayPose& pose);

/// Index of the microphone with the largest projection onto the forward axis.
/// Rotation-invariant, so it is evaluated in the array frame.
Eigen::Index frontal_mic_index(const MicArray& array);

/// The eleven evaluation arrays: 0, 0a-0c (small perturbations), 0d-0f
/// (large perturbations) and the alternative layouts 1-4.
std::vector<MicArray> standard_arrays();

/// Look up an array by name; throws if absent.
const MicArray& find_array(const std::vector<MicArray>& arrays,
                           const std::string& name);

/// Geometry file (JSON). See docs/formats.md.
std::string geometry_to_json(const std::vector<MicArray>& arrays);
std::vector<MicArray> geometry_from_json(const std::string& text);
std::vector<MicArray> load_geometry_file(const std::filesystem::path& path);
void save_geometry_file(const std::filesystem::path& path,
                        const std::vector<MicArray>& arrays);

/// Default location of the shipped geometry file.
std::filesystem::path default_geometry_path();

}  // namespace bandbeam

#endif  // BANDBEAM_GEOMETRY_HPP_
