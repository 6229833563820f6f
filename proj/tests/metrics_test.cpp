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
#include <numbers>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

#include "bandbeam/metrics.hpp"

using namespace bandbeam;

namespace {

Eigen::VectorXd noise(Eigen::Index n, std::uint64_t seed) {
  const auto v = oracle::white_noise(std::size_t(n), seed);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

std::vector<double> as_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

UtteranceRecord record(std::string array, std::string group, std::string split,
                       std::string variant, double db, std::vector<std::optional<double>> bands) {
  UtteranceRecord r;
  r.scene_id = array + "-s0000";
  r.array = std::move(array);
  r.array_group = std::move(group);
  r.split = std::move(split);
  r.variant = std::move(variant);
  r.si_sdr_db = db;
  r.band_si_sdr_db = std::move(bands);
  return r;
}

}  // namespace

TEST_CASE("si_sdr edge cases") {
  const Eigen::VectorXd s = noise(4000, 1);
  CHECK(si_sdr(s, s) == 100.0);
  CHECK(si_sdr(Eigen::VectorXd(3.0 * s), s) == 100.0);
  CHECK(si_sdr(Eigen::VectorXd::Zero(4000), s) == -100.0);
  CHECK_THROWS(si_sdr(s, Eigen::VectorXd::Zero(4000)));
  CHECK_THROWS(si_sdr(s, Eigen::VectorXd::Zero(3999)));
}

TEST_CASE("orthogonal error at one hundredth of the power is 20 dB") {
  const Eigen::VectorXd s = noise(4000, 2);
  Eigen::VectorXd e = noise(4000, 3);
  e -= e.dot(s) / s.squaredNorm() * s;
  e *= std::sqrt(s.squaredNorm() / 100.0) / e.norm();
  CHECK(si_sdr(Eigen::VectorXd(s + e), s) == doctest::Approx(20.0).epsilon(1e-6 / 20.0));
}

TEST_CASE("si_sdr matches a from-definition implementation") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mix(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd s = noise(2000, 100 + i);
    const Eigen::VectorXd est = mix(rng) * s + mix(rng) * noise(2000, 500 + i);
    CHECK(std::abs(si_sdr(est, s) - oracle::si_sdr(as_vector(est), as_vector(s))) < 1e-9);
    const double alpha = (i % 2 ? -1.0 : 1.0) * mix(rng) * 10.0;
    CHECK(std::abs(si_sdr(Eigen::VectorXd(alpha * est), s) - si_sdr(est, s)) < 1e-9);
  }
}

TEST_CASE("buffer si_sdr truncates mismatched lengths") {
  set_warnings_enabled(false);
  const Eigen::VectorXd s = noise(3000, 5);
  const AudioBuffer a = AudioBuffer::mono(s);
  const AudioBuffer b = AudioBuffer::mono(s.head(2500));
  CHECK(si_sdr(a, b) == 100.0);
  CHECK_THROWS(si_sdr(AudioBuffer::zeros(2, 10), AudioBuffer::zeros(1, 10)));
  set_warnings_enabled(true);
}

TEST_CASE("bandwise si_sdr of a perfect estimate") {
  const AudioBuffer s = AudioBuffer::mono(noise(16000, 6));
  const auto bands = bandwise_si_sdr(s, s);
  REQUIRE(bands.size() == 5);
  for (const auto& b : bands) {
    REQUIRE(b.has_value());
    CHECK(*b == 100.0);
  }
}

TEST_CASE("a tone confined to one band only degrades that band") {
  const Eigen::Index n = 256 * 30 + 512;
  const Eigen::VectorXd s = noise(n, 7);
  Eigen::VectorXd tone(n);
  for (Eigen::Index t = 0; t < n; ++t)
    tone[t] = 0.2 * std::sin(2.0 * std::numbers::pi * 3000.0 * double(t) / 16000.0);
  const Eigen::VectorXd est = s + tone;
  const auto bands = bandwise_si_sdr(AudioBuffer::mono(est), AudioBuffer::mono(s));
  for (int b = 0; b < 3; ++b) CHECK(*bands[b] > 60.0);
  CHECK(*bands[4] > 60.0);

  // Band 2-4 kHz against projections computed by direct DFT.
  const auto ref = oracle::naive_band_project(as_vector(s), 512, 64, 128);
  const auto out = oracle::naive_band_project(as_vector(est), 512, 64, 128);
  CHECK(*bands[3] == doctest::Approx(oracle::si_sdr(out, ref)).epsilon(1e-9));
  // Nearly orthogonal, so close to the plain power ratio.
  double pr = 0.0, pe = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    pr += ref[t] * ref[t];
    pe += (out[t] - ref[t]) * (out[t] - ref[t]);
  }
  CHECK(*bands[3] == doctest::Approx(10.0 * std::log10(pr / pe)).epsilon(0.02));
}

TEST_CASE("full-band bandwise value equals si_sdr of round-tripped signals") {
  const Eigen::VectorXd s = noise(12000, 8), v = noise(12000, 9);
  const AudioBuffer est = AudioBuffer::mono(s + 0.5 * v), ref = AudioBuffer::mono(s);
  BandSpec full;
  full.edges = {0.0, 8000.0};
  const double banded = *bandwise_si_sdr(est, ref, full)[0];
  const AudioBuffer re = istft(stft(est)).truncated(12000), rr = istft(stft(ref)).truncated(12000);
  CHECK(std::abs(banded - si_sdr(re, rr)) < 1e-6);
}

TEST_CASE("silent bands are undefined") {
  const Eigen::Index n = 256 * 20 + 512;
  Eigen::VectorXd s(n);
  for (Eigen::Index t = 0; t < n; ++t)
    s[t] = std::sin(2.0 * std::numbers::pi * 250.0 * double(t) / 16000.0);
  const auto bands = bandwise_si_sdr(AudioBuffer::mono(s), AudioBuffer::mono(s));
  CHECK(bands[0].has_value());
  CHECK_FALSE(bands[4].has_value());
}

TEST_CASE("band specs") {
  const BandSpec d;
  CHECK(d.band_count() == 5);
  CHECK(d.label(0) == "0-500");
  CHECK(d.label(4) == "4000-8000");
  CHECK(BandSpec::parse("0,1500,8000").edges == std::vector<double>{0, 1500, 8000});
  CHECK_THROWS(BandSpec::parse("0,500,500"));
  CHECK_THROWS(BandSpec::parse("0,9000"));
  CHECK_THROWS(BandSpec::parse("0,abc"));
  CHECK_THROWS(BandSpec::parse("100"));
}

TEST_CASE("aggregation means") {
  set_warnings_enabled(false);
  const MetricsReport one =
      aggregate("e", {record("0", "Ref", "seen", "Hybrid2", 4.5, {1.0, {}})}, BandSpec::parse("0,1000,8000"),
                {Grouping::kArrayGroup});
  REQUIRE(one.groups.size() == 1);
  CHECK(one.groups[0].si_sdr_db == 4.5);
  CHECK(one.groups[0].count == 1);
  CHECK(one.groups[0].band_si_sdr_db[0] == 1.0);
  CHECK_FALSE(one.groups[0].band_si_sdr_db[1].has_value());

  const MetricsReport two = aggregate(
      "e",
      {record("0a", "Small", "seen", "Noisy", 0.0, {0.0}),
       record("0b", "Small", "seen", "Noisy", 2.0, {3.0})},
      BandSpec::parse("0,8000"), {Grouping::kArrayGroup});
  CHECK(two.find(Grouping::kArrayGroup, "Small", "Noisy")->si_sdr_db == 1.0);
  CHECK(*two.find(Grouping::kArrayGroup, "Small", "Noisy")->band_si_sdr_db[0] == 1.5);
  CHECK(two.find(Grouping::kArrayGroup, "Large", "Noisy") == nullptr);
  CHECK_THROWS(aggregate("e", {}, {}, {Grouping::kAll}));
  set_warnings_enabled(true);
}

TEST_CASE("group means equal member means across groupings") {
  set_warnings_enabled(false);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 5.0);
  const char* arrays[] = {"0", "0a", "0b", "0c", "0d", "0e", "0f", "1", "2", "3", "4"};
  const char* groups[] = {"Ref", "Small", "Small", "Small", "Large", "Large", "Large",
                          "Other", "Other", "Other", "Other"};
  std::vector<UtteranceRecord> records;
  for (int a = 0; a < 11; ++a)
    for (int s = 0; s < 4; ++s) {
      const std::string split = (a == 3 || a == 7 || a == 10) ? "unseen" : "seen";
      records.push_back(record(arrays[a], groups[a], split, "Hybrid2", g(rng), {g(rng)}));
    }
  records[5].ok = false;
  const MetricsReport rep = aggregate("x", records, BandSpec::parse("0,8000"),
                                      {Grouping::kArrayGroup, Grouping::kSplit, Grouping::kAll});
  for (const GroupSummary& gs : rep.groups) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const UtteranceRecord& r : records) {
      const std::string key = gs.grouping == Grouping::kArrayGroup ? r.array_group
                              : gs.grouping == Grouping::kSplit    ? r.split
                                                                   : "All";
      if (key == gs.group && r.ok) {
        sum += r.si_sdr_db;
        ++n;
      }
    }
    CHECK(gs.count == n);
    CHECK(std::abs(gs.si_sdr_db - sum / double(n)) < 1e-9);
  }
  CHECK(rep.find(Grouping::kSplit, "unseen", "Hybrid2")->count == 12);
  CHECK(rep.find(Grouping::kAll, "All", "Hybrid2")->count == 43);
  set_warnings_enabled(true);
}

TEST_CASE("report emission") {
  set_warnings_enabled(false);
  UtteranceRecord failed = record("0", "Ref", "", "Hybrid1", 0.0, {});
  failed.ok = false;
  failed.message = "missing mask, see log";
  const MetricsReport rep =
      aggregate("e",
                {record("0", "Ref", "", "Noisy", -3.25, {-1.0, std::nullopt}),
                 record("0", "Ref", "", "Hybrid2", 7.5, {2.0, 8.0}), failed},
                BandSpec::parse("0,1000,8000"), {Grouping::kArrayGroup});
  const std::string csv = report_csv(rep);
  CHECK(csv.rfind("scene_id,array,array_group,split,variant,status,si_sdr_db,"
                  "si_sdr_0_1000_hz_db,si_sdr_1000_8000_hz_db,pesq,stoi,message\n",
                  0) == 0);
  CHECK(csv.find("0-s0000,0,Ref,,Noisy,ok,-3.25,-1,,,,\n") != std::string::npos);
  CHECK(csv.find("Hybrid1,failed,,,,,,\"missing mask, see log\"") != std::string::npos);
  const auto doc = nlohmann::json::parse(report_json(rep));
  CHECK(doc["groups"]["array_group"]["Ref"]["Hybrid2"]["si_sdr_db"] == 7.5);
  CHECK(doc["groups"]["array_group"]["Ref"]["Noisy"]["count"] == 1);
  CHECK(rep.warnings.size() == 1);
  set_warnings_enabled(true);
}
