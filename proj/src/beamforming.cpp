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

#include "bandbeam/beamforming.hpp"

#include <algorithm>

#include "json.hpp"

namespace bandbeam {

Eigen::MatrixXcd das_weights(const MicArray& array, const Eigen::Vector3d& direction,
                             const StftConfig& config, double c,
                             double sample_rate) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw Error("steering direction must be a unit vector");
  config.validate();
  const Eigen::Matrix3Xd mics = array.mics_m();
  const double width = config.bin_width(sample_rate);
  Eigen::MatrixXcd w(config.bins(), array.size());
  for (Eigen::Index k = 0; k < w.rows(); ++k)
    w.row(k) = das_weight_vector<double>(mics, direction, k * width, c).transpose();
  return w;
}

Spectrogram apply_beamformer(const Eigen::MatrixXcd& weights, const Spectrogram& spec) {
  if (weights.cols() != spec.channel_count())
    throw Error("beamformer has " + std::to_string(weights.cols()) +
                " channels but spectrogram has " +
                std::to_string(spec.channel_count()));
  if (weights.rows() != spec.bins()) throw Error("beamformer bin count mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(spec.bins(), spec.frames());
  for (Eigen::Index l = 0; l < weights.cols(); ++l)
    out += weights.col(l).conjugate().asDiagonal() * spec.channel(l);
  return Spectrogram({std::move(out)}, spec.config(), spec.sample_rate());
}

namespace {

Eigen::Index label_index(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error("no beam labelled '" + label + "'");
  return it - labels.begin();
}

}  // namespace

Eigen::Index BeamSpectrogram::index_of(const std::string& label) const {
  return label_index(labels, label);
}

Eigen::Index BeamformerBank::index_of(const std::string& label) const {
  return label_index(labels, label);
}

BeamformerBank build_bank(const MicArray& array, const StftConfig& config, double c) {
  BeamformerBank bank;
  bank.array_name = array.name;
  bank.config = config;
  bank.speed_of_sound = c;
  bank.labels = {"front", "back", "left", "right"};
  bank.directions = {Eigen::Vector3d::UnitX(), -Eigen::Vector3d::UnitX(),
                     Eigen::Vector3d::UnitY(), -Eigen::Vector3d::UnitY()};
  for (const Eigen::Vector3d& d : bank.directions)
    bank.weights.push_back(das_weights(array, d, config, c));
  return bank;
}

BeamSpectrogram apply_bank(const BeamformerBank& bank, const Spectrogram& spec) {
  std::vector<Eigen::MatrixXcd> beams;
  beams.reserve(bank.weights.size());
  for (const Eigen::MatrixXcd& w : bank.weights)
    beams.push_back(apply_beamformer(w, spec).channel(0));
  return {Spectrogram(std::move(beams), spec.config(), spec.sample_rate()), bank.labels};
}

Eigen::VectorXd directivity(const Eigen::VectorXcd& weights, const MicArray& array,
                            double freq, const Eigen::VectorXd& azimuths, double c) {
  if (weights.size() != array.size()) throw Error("weight vector size mismatch");
  const Eigen::Matrix3Xd mics = array.mics_m();
  Eigen::VectorXd gain(azimuths.size());
  for (Eigen::Index i = 0; i < azimuths.size(); ++i) {
    const Eigen::Vector3d u(std::cos(azimuths[i]), std::sin(azimuths[i]), 0.0);
    gain[i] = std::abs(weights.dot(steering_vector<double>(mics, u, freq, c)));
  }
  return gain;
}

Eigen::VectorXd beam_pattern(const MicArray& array, const Eigen::Vector3d& direction,
                             double freq, const Eigen::VectorXd& azimuths, double c) {
  const Eigen::VectorXcd w = das_weight_vector<double>(array.mics_m(), direction, freq, c);
  return directivity(w, array, freq, azimuths, c);
}

double main_lobe_width_deg(const MicArray& array, const Eigen::Vector3d& direction,
                           double freq, double step_deg, double c) {
  const double threshold = 1.0 / std::sqrt(2.0);
  const double steer = std::atan2(direction.y(), direction.x());
  const Eigen::VectorXcd w = das_weight_vector<double>(array.mics_m(), direction, freq, c);
  const auto steps = static_cast<Eigen::Index>(std::ceil(180.0 / step_deg));
  auto edge = [&](double sign) -> double {
    for (Eigen::Index s = 1; s <= steps; ++s) {
      const double offset = s * step_deg;
      Eigen::VectorXd az(1);
      az[0] = steer + sign * offset * std::numbers::pi / 180.0;
      if (directivity(w, array, freq, az, c)[0] < threshold) return offset;
    }
    return 180.0;
  };
  return std::min(360.0, edge(+1.0) + edge(-1.0));
}

std::string bank_to_json(const BeamformerBank& bank) {
  using nlohmann::json;
  json doc;
  doc["format"] = "bandbeam-bank";
  doc["array"] = bank.array_name;
  doc["fft_size"] = bank.config.fft_size;
  doc["speed_of_sound"] = bank.speed_of_sound;
  json beams = json::array();
  for (std::size_t d = 0; d < bank.weights.size(); ++d) {
    json beam;
    beam["label"] = bank.labels[d];
    beam["direction"] = {bank.directions[d].x(), bank.directions[d].y(),
                         bank.directions[d].z()};
    json bins = json::array();
    const Eigen::MatrixXcd& w = bank.weights[d];
    for (Eigen::Index k = 0; k < w.rows(); ++k) {
      json row = json::array();
      for (Eigen::Index l = 0; l < w.cols(); ++l) row.push_back({w(k, l).real(), w(k, l).imag()});
      bins.push_back(row);
    }
    beam["weights"] = bins;
    beams.push_back(beam);
  }
  doc["beams"] = beams;
  return doc.dump(1) + "\n";
}

}  // namespace bandbeam
