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

#include "bandbeam/metrics.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace bandbeam {
namespace {

std::atomic<bool> g_warnings{true};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_edge(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", hz);
  return buf;
}

int group_rank(const std::string& g) {
  static const char* order[] = {"Ref", "Small", "Large", "Other", "seen", "unseen", "All"};
  for (int i = 0; i < 7; ++i)
    if (g == order[i]) return i;
  return 100;
}

int variant_rank(const std::string& v) {
  static const char* order[] = {"Noisy", "Baseline1", "Baseline2", "Hybrid1", "Hybrid2",
                                "Hybrid3"};
  for (int i = 0; i < 6; ++i)
    if (v == order[i]) return i;
  return 100;
}

std::string group_of(const UtteranceRecord& r, Grouping g) {
  switch (g) {
    case Grouping::kArrayGroup: return r.array_group;
    case Grouping::kSplit: return r.split;
    case Grouping::kAll: return "All";
  }
  return {};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void log_warning(const std::string& message) {
  if (g_warnings.load()) std::cerr << "warning: " << message << "\n";
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference) {
  if (estimate.channel_count() != 1 || reference.channel_count() != 1)
    throw Error("si_sdr expects single-channel buffers");
  Eigen::Index n = estimate.length();
  if (estimate.length() != reference.length()) {
    n = std::min(estimate.length(), reference.length());
    log_warning("si_sdr: truncating to " + std::to_string(n) + " samples (lengths " +
                std::to_string(estimate.length()) + " and " +
                std::to_string(reference.length()) + ")");
  }
  return si_sdr(estimate.samples().row(0).head(n).transpose(),
                reference.samples().row(0).head(n).transpose());
}

std::string BandSpec::label(std::size_t band) const {
  return format_edge(edges.at(band)) + "-" + format_edge(edges.at(band + 1));
}

void BandSpec::validate(double sample_rate) const {
  if (edges.size() < 2) throw Error("band spec needs at least two edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i] < 0.0 || edges[i] > sample_rate / 2.0)
      throw Error("band edge " + format_edge(edges[i]) + " Hz outside [0, Nyquist]");
    if (i > 0 && !(edges[i] > edges[i - 1]))
      throw Error("band edges must be strictly increasing");
  }
}

BandSpec BandSpec::parse(const std::string& text) {
  BandSpec spec;
  spec.edges.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      spec.edges.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw Error("");
    } catch (const std::exception&) {
      throw Error("cannot parse band edge '" + item + "'");
    }
  }
  spec.validate();
  return spec;
}

std::vector<std::optional<double>> bandwise_si_sdr(const AudioBuffer& estimate,
                                                   const AudioBuffer& reference,
                                                   const BandSpec& bands,
                                                   const StftConfig& config) {
  bands.validate(reference.sample_rate());
  AudioBuffer est = estimate;
  AudioBuffer ref = reference;
  if (est.length() != ref.length()) {
    const Eigen::Index n = std::min(est.length(), ref.length());
    log_warning("bandwise_si_sdr: truncating to " + std::to_string(n) + " samples");
    est = est.truncated(n);
    ref = ref.truncated(n);
  }
  const double total = ref.samples().squaredNorm();
  if (!(total > 0.0)) throw Error("si_sdr: zero reference");

  std::vector<std::optional<double>> out;
  for (std::size_t b = 0; b < bands.band_count(); ++b) {
    const double lo = bands.edges[b], hi = bands.edges[b + 1];
    const AudioBuffer ref_band = band_project(ref, lo, hi, config).audio;
    if (ref_band.samples().squaredNorm() < 1e-12 * total) {
      out.push_back(std::nullopt);
      continue;
    }
    const AudioBuffer est_band = band_project(est, lo, hi, config).audio;
    out.push_back(si_sdr(est_band, ref_band));
  }
  return out;
}

std::string grouping_name(Grouping g) {
  switch (g) {
    case Grouping::kArrayGroup: return "array_group";
    case Grouping::kSplit: return "split";
    case Grouping::kAll: return "all";
  }
  return {};
}

const GroupSummary* MetricsReport::find(Grouping grouping, const std::string& group,
                                        const std::string& variant) const {
  for (const GroupSummary& g : groups)
    if (g.grouping == grouping && g.group == group && g.variant == variant) return &g;
  return nullptr;
}

MetricsReport aggregate(std::string experiment, std::vector<UtteranceRecord> records,
                        const BandSpec& bands, const std::vector<Grouping>& groupings) {
  if (records.empty()) throw Error("aggregate: no records");
  MetricsReport report;
  report.experiment = std::move(experiment);
  report.bands = bands;
  report.records = std::move(records);

  const std::size_t n_bands = bands.band_count();
  for (Grouping grouping : groupings) {
    using Key = std::pair<std::string, std::string>;
    auto less = [](const Key& a, const Key& b) {
      const int ga = group_rank(a.first), gb = group_rank(b.first);
      if (ga != gb) return ga < gb;
      if (a.first != b.first) return a.first < b.first;
      const int va = variant_rank(a.second), vb = variant_rank(b.second);
      if (va != vb) return va < vb;
      return a.second < b.second;
    };
    struct Sum {
      std::size_t members = 0;
      std::size_t count = 0;
      double si_sdr = 0.0;
      std::vector<double> band_sum;
      std::vector<std::size_t> band_count;
    };
    std::map<Key, Sum, decltype(less)> sums(less);
    for (const UtteranceRecord& r : report.records) {
      const std::string group = group_of(r, grouping);
      if (group.empty()) continue;
      Sum& s = sums[{group, r.variant}];
      ++s.members;
      s.band_sum.resize(n_bands, 0.0);
      s.band_count.resize(n_bands, 0);
      if (!r.ok) continue;
      ++s.count;
      s.si_sdr += r.si_sdr_db;
      for (std::size_t b = 0; b < n_bands && b < r.band_si_sdr_db.size(); ++b) {
        if (!r.band_si_sdr_db[b]) continue;
        s.band_sum[b] += *r.band_si_sdr_db[b];
        ++s.band_count[b];
      }
    }
    for (const auto& [key, s] : sums) {
      if (s.count == 0) {
        report.warnings.push_back(grouping_name(grouping) + " group '" + key.first +
                                  "' has no successful " + key.second +
                                  " records; omitted");
        continue;
      }
      GroupSummary g;
      g.grouping = grouping;
      g.group = key.first;
      g.variant = key.second;
      g.count = s.count;
      g.si_sdr_db = s.si_sdr / static_cast<double>(s.count);
      g.band_counts = s.band_count;
      for (std::size_t b = 0; b < n_bands; ++b) {
        if (s.band_count[b] == 0)
          g.band_si_sdr_db.push_back(std::nullopt);
        else
          g.band_si_sdr_db.push_back(s.band_sum[b] / static_cast<double>(s.band_count[b]));
      }
      report.groups.push_back(std::move(g));
    }
  }
  for (const std::string& w : report.warnings) log_warning(w);
  return report;
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "scene_id,array,array_group,split,variant,status,si_sdr_db";
  for (std::size_t b = 0; b < report.bands.band_count(); ++b)
    out << ",si_sdr_" << format_edge(report.bands.edges[b]) << "_"
        << format_edge(report.bands.edges[b + 1]) << "_hz_db";
  out << ",pesq,stoi,message\n";
  for (const UtteranceRecord& r : report.records) {
    out << csv_escape(r.scene_id) << ',' << csv_escape(r.array) << ','
        << csv_escape(r.array_group) << ',' << csv_escape(r.split) << ','
        << csv_escape(r.variant) << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) out << format_number(r.si_sdr_db);
    for (std::size_t b = 0; b < report.bands.band_count(); ++b) {
      out << ',';
      if (r.ok && b < r.band_si_sdr_db.size() && r.band_si_sdr_db[b])
        out << format_number(*r.band_si_sdr_db[b]);
    }
    out << ",,," << csv_escape(r.message) << '\n';
  }
  return out.str();
}

std::string report_json(const MetricsReport& report) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["experiment"] = report.experiment;
  doc["bands_hz"] = report.bands.edges;
  ordered_json groupings = ordered_json::object();
  for (const GroupSummary& g : report.groups) {
    ordered_json entry;
    entry["count"] = g.count;
    entry["si_sdr_db"] = g.si_sdr_db;
    ordered_json bands = ordered_json::object();
    for (std::size_t b = 0; b < g.band_si_sdr_db.size(); ++b) {
      const std::string label = report.bands.label(b);
      if (g.band_si_sdr_db[b])
        bands[label] = *g.band_si_sdr_db[b];
      else
        bands[label] = nullptr;
    }
    entry["band_si_sdr_db"] = bands;
    groupings[grouping_name(g.grouping)][g.group][g.variant] = entry;
  }
  doc["groups"] = groupings;
  doc["records"] = report.records.size();
  doc["failed_records"] = std::count_if(report.records.begin(), report.records.end(),
                                        [](const UtteranceRecord& r) { return !r.ok; });
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

}  // namespace bandbeam
