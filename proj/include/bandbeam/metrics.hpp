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

#ifndef BANDBEAM_METRICS_HPP_
#define BANDBEAM_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandbeam/audio.hpp"

namespace bandbeam {

inline constexpr double kSiSdrCapDb = 100.0;

/// Writes "warning: <msg>" to stderr unless warnings are silenced.
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled);

/// Scale-invariant SDR in dB, clamped to [-100, 100]:
///   alpha = <est, ref> / |ref|^2,  10 log10(|alpha ref|^2 / |alpha ref - est|^2).
/// Inputs must have equal length and a nonzero reference.
template <typename DerivedEst, typename DerivedRef>
double si_sdr(const Eigen::MatrixBase<DerivedEst>& estimate,
              const Eigen::MatrixBase<DerivedRef>& reference) {
  if (estimate.size() != reference.size())
    throw Error("si_sdr: estimate and reference lengths differ");
  const double ref_energy = reference.squaredNorm();
  if (!(ref_energy > 0.0)) throw Error("si_sdr: zero reference");
  const double alpha = estimate.dot(reference) / ref_energy;
  const double target = alpha * alpha * ref_energy;
  const double error = (estimate - alpha * reference).squaredNorm();
  if (error == 0.0) return target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / error), -kSiSdrCapDb, kSiSdrCapDb);
}

/// Single-channel buffers. A length mismatch truncates to the shorter one
/// and logs a warning.
double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference);

/// Band edges in Hz; consecutive pairs form half-open bands.
struct BandSpec {
  std::vector<double> edges{0.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};

  std::size_t band_count() const { return edges.empty() ? 0 : edges.size() - 1; }
  /// e.g. "0-500".
  std::string label(std::size_t band) const;
  /// Strictly increasing, within [0, Nyquist], at least two edges.
  void validate(double sample_rate = kSampleRate) const;
  /// Parses "0,500,1000" style lists.
  static BandSpec parse(const std::string& text);
};

/// Per band: si_sdr of the band projections of estimate and reference.
/// Bands where the projected reference holds less than 1e-12 of the
/// reference energy are undefined (nullopt).
std::vector<std::optional<double>> bandwise_si_sdr(const AudioBuffer& estimate,
                                                   const AudioBuffer& reference,
                                                   const BandSpec& bands = {},
                                                   const StftConfig& config = {});

/// One evaluated (scene, variant) pair. `variant` is "Noisy" for the
/// unprocessed reference channel.
struct UtteranceRecord {
  std::string scene_id;
  std::string array;
  std::string array_group;  // Ref, Small, Large, Other
  std::string split;        // seen, unseen, or empty
  std::string variant;
  bool ok = true;
  std::string message;
  double si_sdr_db = 0.0;
  std::vector<std::optional<double>> band_si_sdr_db;
};

enum class Grouping { kArrayGroup, kSplit, kAll };

std::string grouping_name(Grouping g);

struct GroupSummary {
  Grouping grouping = Grouping::kAll;
  std::string group;
  std::string variant;
  std::size_t count = 0;
  double si_sdr_db = 0.0;
  std::vector<std::optional<double>> band_si_sdr_db;  // mean over defined values
  std::vector<std::size_t> band_counts;
};

struct MetricsReport {
  std::string experiment;
  BandSpec bands;
  std::vector<UtteranceRecord> records;
  std::vector<GroupSummary> groups;
  std::vector<std::string> warnings;

  /// Lookup of a group mean; nullptr when absent.
  const GroupSummary* find(Grouping grouping, const std::string& group,
                           const std::string& variant) const;
};

/// Arithmetic means of the successful records per (group, variant) for each
/// requested grouping. Groups without successful members are left out and
/// noted in `warnings`.
MetricsReport aggregate(std::string experiment, std::vector<UtteranceRecord> records,
                        const BandSpec& bands, const std::vector<Grouping>& groupings);

/// One row per record; fixed columns documented in docs/formats.md.
std::string report_csv(const MetricsReport& report);
/// Nested group means.
std::string report_json(const MetricsReport& report);

}  // namespace bandbeam

#endif  // BANDBEAM_METRICS_HPP_
