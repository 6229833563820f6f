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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "bandbeam/room.hpp"

using namespace bandbeam;

namespace {
using cd = std::complex<double>;


AudioBuffer noise_utterance(Eigen::Index n, std::uint64_t seed, double gain = 1.0) {
  const auto v = oracle::white_noise(std::size_t(n), seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x[t] = gain * v[std::size_t(t)];
  return AudioBuffer::mono(x);
}

std::vector<AudioBuffer> utterances(Eigen::Index n, std::uint64_t seed) {
  std::vector<AudioBuffer> u;
  for (int s = 0; s < 6; ++s) u.push_back(noise_utterance(n, seed + s, 0.1 * (s + 1)));
  return u;
}

double wrap_deg(double rad) {
  double d = std::fmod(rad * 180.0 / std::numbers::pi, 360.0);
  return d < 0 ? d + 360.0 : d;
}

}  // namespace

TEST_CASE("Sabine absorption") {
  Room r{{4, 6, 3}, 0.5};
  CHECK(absorption_from_t60(r) == doctest::Approx(0.1611 * 72.0 / (108.0 * 0.5)));
  CHECK(absorption_from_t60(r) == doctest::Approx(0.2148).epsilon(1e-3));
  Room r2 = r;
  r2.t60 = 1.0;
  CHECK(absorption_from_t60(r2) == doctest::Approx(absorption_from_t60(r) / 2.0));
  CHECK(reflection_from_t60(r) == doctest::Approx(std::sqrt(1.0 - absorption_from_t60(r))));
  Room tiny{{0.5, 0.5, 0.5}, 0.01};
  CHECK_THROWS_WITH(absorption_from_t60(tiny), "infeasible T60");
  Room bad{{4, 6, 3}, 0.0};
  CHECK_THROWS(absorption_from_t60(bad));
}

TEST_CASE("direct path only") {
  const Room r{{4, 6, 3}, 0.3};
  const Eigen::Vector3d mic(2, 3, 1.5), src(2.5, 3, 1.5);
  RirOptions opt;
  opt.max_order = 0;
  opt.highpass = false;
  const Rir rir = simulate_rir(r, src, mic, opt);
  CHECK(rir.direct_path_delay == doctest::Approx(0.5 / 343.0 * 16000.0));
  CHECK(rir.direct_path_delay == doctest::Approx(23.32).epsilon(1e-3));
  Eigen::Index peak;
  rir.taps.cwiseAbs().maxCoeff(&peak);
  CHECK(std::abs(double(peak) - 23.0) <= 1.0);
  CHECK(std::isfinite(rir.taps.squaredNorm()));
  const auto arrivals = image_sources(r, src, mic, 0, 1e9);
  REQUIRE(arrivals.size() == 1);
  CHECK(arrivals[0].amplitude == doctest::Approx(1.0 / (4.0 * std::numbers::pi * 0.5)));
}

TEST_CASE("inverse distance law") {
  const Room r{{6, 6, 3}, 0.3};
  const Eigen::Vector3d mic(2, 3, 1.5);
  RirOptions opt;
  opt.max_order = 0;
  opt.highpass = false;
  const Rir near = simulate_rir(r, {3, 3, 1.5}, mic, opt);
  const Rir far = simulate_rir(r, {4, 3, 1.5}, mic, opt);
  // The windowed sinc has unit DC gain, so the tap sum is the arrival amplitude.
  CHECK(near.taps.sum() / far.taps.sum() == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("image enumeration matches repeated mirroring") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const Room r{{2.5 + 2.5 * u(rng), 3 + 6 * u(rng), 2.2 + 1.3 * u(rng)},
                 0.2 + 0.3 * u(rng),
                 AbsorptionModel::kSabine};
    const Eigen::Vector3d src(r.dims.x() * u(rng), r.dims.y() * u(rng), r.dims.z() * u(rng));
    const Eigen::Vector3d mic(r.dims.x() * u(rng), r.dims.y() * u(rng), r.dims.z() * u(rng));
    const double beta = std::sqrt(1.0 - 0.1611 * r.volume() / (r.surface() * r.t60));
    for (int order = 0; order <= 2; ++order) {
      const auto ref = oracle::mirror_images(r.dims, src, order);
      const auto got = image_sources(r, src, mic, order, 1e9);
      CHECK(got.size() == (order == 0 ? 1u : order == 1 ? 7u : 25u));
      REQUIRE(got.size() == ref.size());
      for (const oracle::Arrival& a : ref) {
        const double d = (a.position - mic).norm();
        const auto it = std::min_element(got.begin(), got.end(), [&](const auto& x, const auto& y) {
          return (x.position - a.position).norm() < (y.position - a.position).norm();
        });
        CHECK((it->position - a.position).norm() < 1e-9);
        CHECK(it->order == a.order);
        CHECK(std::abs(it->delay - d / 343.0 * 16000.0) < 1e-9);
        CHECK(it->amplitude == doctest::Approx(std::pow(beta, a.order) / (4 * std::numbers::pi * d)));
      }
    }
  }
}

TEST_CASE("order-one RIR has one peak per image") {
  const Room r{{4, 6, 3}, 0.3, AbsorptionModel::kSabine};
  const Eigen::Vector3d mic(1.3, 2.1, 1.2), src(2.9, 4.4, 1.7);
  RirOptions opt;
  opt.max_order = 1;
  opt.highpass = false;
  const Rir rir = simulate_rir(r, src, mic, opt);
  // Subtracting each predicted impulse from the taps must leave nothing.
  Eigen::VectorXd residual = rir.taps;
  for (const auto& a : oracle::mirror_images(r.dims, src, 1)) {
    const double d = (a.position - mic).norm();
    add_fractional_impulse(residual, d / 343.0 * 16000.0,
                           -std::pow(reflection_from_t60(r), a.order) / (4 * std::numbers::pi * d));
  }
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fractional impulse interpolates a delayed band-limited pulse") {
  Eigen::VectorXd taps = Eigen::VectorXd::Zero(200);
  add_fractional_impulse(taps, 100.0, 2.0);
  CHECK(taps[100] == doctest::Approx(2.0));
  CHECK(taps.cwiseAbs().sum() == doctest::Approx(2.0));
  taps.setZero();
  add_fractional_impulse(taps, 100.3, 1.0);
  Eigen::Index peak;
  taps.maxCoeff(&peak);
  CHECK(peak == 100);
  CHECK(taps.sum() == doctest::Approx(1.0).epsilon(1e-3));
  // The centroid of a symmetric kernel sits at the fractional delay.
  double m = 0.0;
  for (Eigen::Index t = 0; t < 200; ++t) m += double(t) * taps[t];
  CHECK(m / taps.sum() == doctest::Approx(100.3).epsilon(1e-3));
}

TEST_CASE("measured decay time tracks the target T60") {
  const Room r{{4, 6, 3}, 0.5};
  const Rir rir = simulate_rir(r, {2.7, 4.1, 1.6}, {1.4, 2.2, 1.5});
  const double t60 = oracle::schroeder_t60(rir.taps, 16000.0);
  CHECK(t60 == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("DC blocker follows its transfer function") {
  const double fs = 16000.0, w0 = 2.0 * std::numbers::pi * 100.0 / fs;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(1 << 15);
  h[0] = 1.0;
  highpass_rir(h, fs);
  // H(z) = (1 - z^-1)(1 - r z^-1) / (1 - 2 r cos(w0) z^-1 + r^2 z^-2), r = exp(-w0).
  const double r = std::exp(-w0);
  for (double f : {0.0, 20.0, 100.0, 500.0, 4000.0, 7900.0}) {
    const cd z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
    const cd expected =
        (1.0 - z1) * (1.0 - r * z1) / (1.0 - 2.0 * r * std::cos(w0) * z1 + r * r * z1 * z1);
    cd got = 0.0;
    cd zn = 1.0;
    for (Eigen::Index n = 0; n < h.size(); ++n, zn *= z1) got += h[n] * zn;
    CHECK(std::abs(got - expected) < 1e-9);
  }
  CHECK(std::abs(h.sum()) < 1e-9);
}

TEST_CASE("simulated responses carry no DC offset") {
  const Room r{{4, 6, 3}, 0.4};
  const Rir raw = [&] {
    RirOptions o;
    o.highpass = false;
    return simulate_rir(r, {2.7, 4.1, 1.6}, {1.4, 2.2, 1.5}, o);
  }();
  const Rir rir = simulate_rir(r, {2.7, 4.1, 1.6}, {1.4, 2.2, 1.5});
  // Positive-only images pile up at low frequency; the filter removes that.
  CHECK(std::abs(raw.taps.sum()) > 10.0 * std::abs(rir.taps.sum()));
  Eigen::Index p_raw, p_rir;
  raw.taps.cwiseAbs().maxCoeff(&p_raw);
  rir.taps.cwiseAbs().maxCoeff(&p_rir);
  CHECK(p_raw == p_rir);
}

TEST_CASE("decay-matched walls") {
  Room r{{4, 6, 3}, 0.5};
  const double beta = decay_matched_reflection(r);
  CHECK(beta > 0.0);
  CHECK(beta < 1.0);
  CHECK(wall_reflection(r) == beta);
  r.absorption = AbsorptionModel::kSabine;
  CHECK(wall_reflection(r) == reflection_from_t60(r));
  // The lattice decays more slowly than a diffuse field, so walls absorb more.
  CHECK(beta < reflection_from_t60(r));

  Room longer = r;
  longer.t60 = 0.8;
  CHECK(decay_matched_reflection(longer) > beta);
  Room tiny{{0.5, 0.5, 0.5}, 0.01};
  CHECK_THROWS_WITH(decay_matched_reflection(tiny), "infeasible T60");
}

TEST_CASE("a long flat room reaches its T60 only with decay-matched walls") {
  Room r{{3.0, 8.4, 2.3}, 0.45};
  const Eigen::Vector3d src(1.0, 1.5, 1.6), mic(2.0, 6.5, 1.5);
  const double matched = oracle::schroeder_t60(simulate_rir(r, src, mic).taps, 16000.0);
  CHECK(matched == doctest::Approx(0.45).epsilon(0.2));
  r.absorption = AbsorptionModel::kSabine;
  const double sabine = oracle::schroeder_t60(simulate_rir(r, src, mic).taps, 16000.0);
  CHECK(sabine > 1.2 * 0.45);
}

TEST_CASE("out-of-room positions are rejected") {
  const Room r{{4, 6, 3}, 0.3};
  CHECK_THROWS(simulate_rir(r, {5, 1, 1}, {1, 1, 1}));
  CHECK_THROWS(simulate_rir(r, {1, 1, 1}, {1, 1, -0.1}));
  CHECK_THROWS(simulate_rir(r, {1, 1, 1}, {1, 1, 1}));
}

TEST_CASE("scene sampling is deterministic") {
  const MicArray a = nominal_array0();
  const Scene s1 = sample_scene(std::uint64_t{9}, a), s2 = sample_scene(std::uint64_t{9}, a);
  CHECK(s1.room.dims == s2.room.dims);
  CHECK(s1.room.t60 == s2.room.t60);
  CHECK(s1.pose.yaw == s2.pose.yaw);
  CHECK(s1.target.position == s2.target.position);
  for (int i = 0; i < kInterfererCount; ++i)
    CHECK(s1.interferers[i].position == s2.interferers[i].position);
  CHECK(s1.noise_seed == s2.noise_seed);
  CHECK(s1.seed == 9);
}

TEST_CASE("bulk scene sampling respects every support") {
  const MicArray a = nominal_array0();
  double height_sum = 0.0;
  int height_n = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Scene s = sample_scene(seed, a);
    CHECK_NOTHROW(s.validate());
    const Room& r = s.room;
    CHECK((r.dims.x() >= 2.5 && r.dims.x() <= 5.0));
    CHECK((r.dims.y() >= 3.0 && r.dims.y() <= 9.0));
    CHECK((r.dims.z() >= 2.2 && r.dims.z() <= 3.5));
    CHECK((r.t60 >= 0.2 && r.t60 <= 0.5));
    CHECK(s.pose.center.z() == 1.5);
    CHECK(s.pose.center.x() >= 1.0);
    CHECK(s.pose.center.x() <= r.dims.x() - 1.0);
    CHECK(s.pose.center.y() >= 1.0);
    CHECK(s.pose.center.y() <= r.dims.y() - 1.0);
    CHECK((s.pose.yaw >= 0.0 && s.pose.yaw < 2 * std::numbers::pi));
    CHECK(s.max_order == default_max_order(r));

    // Target on the yawed forward axis.
    const Eigen::Vector3d to_target = s.target.position - s.pose.center;
    const Eigen::Vector3d fwd = world_forward(a, s.pose);
    CHECK(std::abs(fwd.x() * to_target.y() - fwd.y() * to_target.x()) < 1e-12);
    CHECK(fwd.dot(to_target) > 0.0);
    const double rs = to_target.head<2>().norm();
    CHECK((rs >= 0.3 && rs <= 1.0));

    int per_sector[5] = {};
    REQUIRE(s.interferers.size() == 5);
    for (const SourceSpec& i : s.interferers) {
      const Eigen::Vector3d d = i.position - s.pose.center;
      const double rel = wrap_deg(std::atan2(d.y(), d.x()) - s.pose.yaw);
      const int sector = rel >= 340.0 ? 4 : int((rel - 20.0) / 64.0);
      REQUIRE(rel >= 20.0);
      REQUIRE(rel <= 340.0);
      ++per_sector[sector];
      const double ri = d.head<2>().norm();
      CHECK((ri >= 1.0 && ri <= 8.0));
      CHECK((i.height > 0.2 - 1e-12 && i.height < r.dims.z() - 0.2 + 1e-12));
      CHECK(r.contains(i.position));
      height_sum += i.height;
      ++height_n;
    }
    for (int c : per_sector) CHECK(c == 1);
  }
  // Wall and clipping effects pull the mean only slightly off 1.6 m.
  CHECK(height_sum / height_n == doctest::Approx(1.6).epsilon(0.05));
}

TEST_CASE("sector lookup") {
  const double deg = std::numbers::pi / 180.0;
  CHECK(interferer_sector(10 * deg) == -1);
  CHECK(interferer_sector(20 * deg) == 0);
  CHECK(interferer_sector(83.9 * deg) == 0);
  CHECK(interferer_sector(84.1 * deg) == 1);
  CHECK(interferer_sector(211 * deg) == 2);
  CHECK(interferer_sector(340 * deg) == 4);
  CHECK(interferer_sector(-30 * deg) == 4);
  CHECK(interferer_sector(350 * deg) == -1);
}

TEST_CASE("rendering decomposes into target image and interference") {
  const Scene s = sample_scene(std::uint64_t{123}, nominal_array0());
  RenderOptions opt;
  opt.rir.max_order = 3;
  Scene fast = s;
  fast.max_order = 3;
  const auto u = utterances(8000, 50);
  const RenderedScene out = render_mixture(fast, u, opt);
  CHECK(out.mixture.channel_count() == 4);
  CHECK(out.mixture.length() == 8000);
  const Eigen::MatrixXd sum = out.target_image.samples() + out.interference.samples();
  CHECK(out.mixture.samples() == sum);

  // Only the target speaking and no sensor noise: mixture is the target image.
  std::vector<AudioBuffer> quiet = u;
  for (int i = 1; i < 6; ++i) quiet[i] = AudioBuffer::zeros(1, 8000);
  RenderOptions silent = opt;
  silent.add_noise = false;
  const RenderedScene t = render_mixture(fast, quiet, silent);
  CHECK(t.mixture.samples() == t.target_image.samples());
  CHECK(t.target_image.samples() == out.target_image.samples());
}

TEST_CASE("sensor noise sits at 30 dB below the target image") {
  Scene s = sample_scene(std::uint64_t{77}, nominal_array0());
  s.max_order = 2;
  auto u = utterances(16000, 3);
  for (int i = 1; i < 6; ++i) u[i] = AudioBuffer::zeros(1, 16000);
  const RenderedScene out = render_mixture(s, u);
  const double py = out.target_image.samples().squaredNorm();
  const double pn = out.interference.samples().squaredNorm();
  CHECK(10.0 * std::log10(py / pn) == doctest::Approx(30.0).epsilon(0.1 / 30.0));
  // Independent per channel.
  const Eigen::MatrixXd& n = out.interference.samples();
  const double corr = n.row(0).dot(n.row(1)) / (n.row(0).norm() * n.row(1).norm());
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("interferer images add linearly") {
  Scene s = sample_scene(std::uint64_t{5}, nominal_array0());
  s.max_order = 3;
  const auto u = utterances(6000, 9);
  RenderOptions opt;
  opt.add_noise = false;
  const RenderedScene joint = render_mixture(s, u, opt);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(4, 6000);
  for (int k = 1; k < 6; ++k) {
    std::vector<AudioBuffer> one = u;
    for (int i = 1; i < 6; ++i)
      if (i != k) one[i] = AudioBuffer::zeros(1, 6000);
    sum += render_mixture(s, one, opt).interference.samples();
  }
  CHECK((sum - joint.interference.samples()).norm() <
        1e-10 * joint.interference.samples().norm());
}

TEST_CASE("render preconditions") {
  Scene s = sample_scene(std::uint64_t{5}, nominal_array0());
  s.max_order = 1;
  auto u = utterances(4000, 1);
  u[0] = AudioBuffer::zeros(1, 4000);
  CHECK_THROWS_WITH(render_mixture(s, u), "zero-power target");
  u.pop_back();
  CHECK_THROWS(render_mixture(s, u));
}

TEST_CASE("fft convolution matches direct convolution") {
  const auto a = oracle::white_noise(300, 1), b = oracle::white_noise(40, 2);
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(a.data(), 300);
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(b.data(), 40);
  const Eigen::VectorXd y = fft_convolve(x, h, 339);
  for (int n = 0; n < 339; ++n) {
    double acc = 0.0;
    for (int k = 0; k < 40; ++k)
      if (n - k >= 0 && n - k < 300) acc += h[k] * x[n - k];
    CHECK(y[n] == doctest::Approx(acc).scale(1.0).epsilon(1e-10));
  }
}
