// synthesis_test.cpp - intensity sampling, bias, degradation and the full generator

#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "callosim/random.hpp"
#include "callosim/synthesis.hpp"

using namespace callosim;
using namespace callosim::synth;

namespace {

std::array<double, kTissueCount> ramp_means() {
  std::array<double, kTissueCount> m{};
  for (int c = 0; c < kTissueCount; ++c) m[std::size_t(c)] = 0.1 * double(c);
  return m;
}

bool same_bytes(const IntensityVolume& a, const IntensityVolume& b) {
  return a.geometry() == b.geometry() && std::memcmp(a.buffer().data(), b.buffer().data(), a.size() * sizeof(float)) == 0;
}

std::pair<float, float> min_max(const IntensityVolume& img) {
  const auto [lo, hi] = std::minmax_element(img.buffer().begin(), img.buffer().end());
  return {*lo, *hi};
}

}  // namespace

TEST_SUITE("synthesis") {
  TEST_CASE("collapsed ranges give exact per-label means") {
    const auto labels = oracle::random_labels(oracle::grid(12), 8, 3);
    const auto cfg = SynthConfig::identity(ramp_means());
    const auto img = sample_intensities(labels, cfg, 99);
    for (std::size_t q = 0; q < img.size(); ++q) CHECK(img[q] == static_cast<float>(0.1 * double(code(labels[q]))));
  }

  TEST_CASE("sample mean follows the CLT bound") {
    const LabelVolume wm(oracle::grid(Index3{50, 50, 40}), Tissue::WM);
    SynthConfig cfg;
    cfg.labels[code(Tissue::WM)] = {{0.5, 0.5}, {0.1, 0.1}};
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto img = sample_intensities(wm, cfg, seed);
      double sum = 0;
      for (float v : img.buffer()) sum += v;
      CHECK(std::abs(sum / double(img.size()) - 0.5) <= 0.002);
    }
  }

  TEST_CASE("intensity sampling is deterministic and worker independent") {
    const auto& ph = oracle::small_phantom();
    const SynthConfig cfg;
    const auto a = sample_intensities(ph, cfg, 5, 1);
    CHECK(same_bytes(a, sample_intensities(ph, cfg, 5, 1)));
    CHECK(same_bytes(a, sample_intensities(ph, cfg, 5, 4)));
    CHECK_FALSE(same_bytes(a, sample_intensities(ph, cfg, 6, 1)));
  }

  TEST_CASE("bias field") {
    const Geometry g{{48, 40, 36}, {0.5, 0.5, 0.5}, {}};
    const auto ones = bias_field(g, 0.0, 32.0, 1);
    for (float v : ones.buffer()) CHECK(v == 1.0f);

    const double amp = 0.4;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto f = bias_field(g, amp, 32.0, seed);
      const double bound = 2.0 * amp / (32.0 / 0.5);
      double worst = 0.0, peak = 0.0;
      for (std::int64_t k = 0; k < 36; ++k)
        for (std::int64_t j = 0; j < 40; ++j)
          for (std::int64_t i = 0; i < 48; ++i) {
            const double v = f(i, j, k);
            REQUIRE(v > 0.0);
            peak = std::max(peak, std::abs(std::log(v)));
            for (const Index3& o : {Index3{1, 0, 0}, Index3{0, 1, 0}, Index3{0, 0, 1}}) {
              if (!g.inside(i + o[0], j + o[1], k + o[2])) continue;
              const double w = f(i + o[0], j + o[1], k + o[2]);
              worst = std::max(worst, std::abs(v - w) / std::max(v, w));
            }
          }
      CHECK(worst <= bound + 1e-6);
      CHECK(peak <= amp + 1e-6);
      CHECK(same_bytes(f, bias_field(g, amp, 32.0, seed, 3)));
    }
  }

  TEST_CASE("degradation: no-op, constants and edge spread") {
    const Geometry g{{20, 16, 12}, {1.0, 1.0, 1.0}, {}};
    IntensityVolume img(g);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(0.1f, 1.0f);
    for (auto& v : img.buffer()) v = u(rng);
    const auto same = degrade_resolution(img, g.spacing, 3);
    for (std::size_t q = 0; q < img.size(); ++q) CHECK(std::abs(same[q] - img[q]) <= 1e-6 * std::abs(img[q]));

    const IntensityVolume flat(g, 0.37f);
    for (std::uint64_t s = 0; s < 4; ++s) {
      const auto out = degrade_resolution(flat, {3.0, 1.0, 2.5}, s);
      for (float v : out.buffer()) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
      const auto blurred = gaussian_blur(flat, {1.0, 0.5, 0.0});
      for (float v : blurred.buffer()) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));
    }

    const Geometry line{{64, 2, 2}, {1.0, 1.0, 1.0}, {}};
    IntensityVolume edge(line);
    for (std::int64_t k = 0; k < 2; ++k)
      for (std::int64_t j = 0; j < 2; ++j)
        for (std::int64_t i = 32; i < 64; ++i) edge(i, j, k) = 1.0f;
    for (std::uint64_t s = 0; s < 8; ++s) {
      const auto out = degrade_resolution(edge, {4.0, 1.0, 1.0}, s);
      std::int64_t p10 = -1, p90 = -1;
      for (std::int64_t i = 0; i < 64; ++i) {
        if (p10 < 0 && out(i, 0, 0) >= 0.1f) p10 = i;
        if (p90 < 0 && out(i, 0, 0) >= 0.9f) p90 = i;
      }
      REQUIRE(p10 >= 0);
      REQUIRE(p90 >= 0);
      CHECK(p90 - p10 >= 4);
    }
  }

  TEST_CASE("normalisation") {
    IntensityVolume img(oracle::grid(3), 2.0f);
    normalize_min_max(img);
    for (float v : img.buffer()) CHECK(v == 0.0f);
    img[4] = 5.0f;
    img[7] = -1.0f;
    normalize_min_max(img);
    CHECK(img[7] == 0.0f);
    CHECK(img[4] == 1.0f);
    CHECK(img[0] == doctest::Approx(1.0f / 6.0f));
  }

  TEST_CASE("identity pipeline is the normalised piecewise-constant image") {
    const auto& ph = oracle::small_phantom();
    const auto sample = synthesize(ph, SynthConfig::identity(ramp_means()), 17);
    CHECK(sample.labels == ph);
    const double top = double(static_cast<float>(0.8));
    for (std::size_t q = 0; q < ph.size(); ++q) {
      const double level = double(static_cast<float>(0.1 * double(code(ph[q]))));
      CHECK(sample.image[q] == static_cast<float>(level / top));
    }
  }

  TEST_CASE("synthesised images span [0, 1] and are worker independent") {
    const auto& ph = oracle::small_phantom();
    const SynthConfig cfg;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto one = synthesize(ph, cfg, seed, 1);
      const auto [lo, hi] = min_max(one.image);
      CHECK(lo == 0.0f);
      CHECK(hi == 1.0f);
      CHECK(same_bytes(one.image, synthesize(ph, cfg, seed, 8).image));
    }
    CHECK_FALSE(same_bytes(synthesize(ph, cfg, 1).image, synthesize(ph, cfg, 2).image));
  }

  TEST_CASE("config validation and JSON") {
    SynthConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
    c.gamma = {0.0, 1.0};
    CHECK_THROWS_AS(c.validate(), Error);
    c = SynthConfig{};
    c.noise_std = {0.2, 0.1};
    CHECK_THROWS_AS(c.validate(), Error);
    c = SynthConfig{};
    c.bias_scale_mm = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);

    auto j = nlohmann::json::parse(R"({"labels": {"CC": {"mean": [0.9, 0.9], "std": [0, 0]}}, "noise_std": [0, 0]})");
    const auto parsed = config_from_json(j);
    CHECK(parsed.labels[code(Tissue::CC)].mean.min == 0.9);
    CHECK(parsed.noise_std.max == 0.0);
    CHECK(parsed.gamma.max == SynthConfig{}.gamma.max);
    j["labels"]["Skull"] = {{"mean", {0, 1}}};
    CHECK_THROWS_AS(config_from_json(j), Error);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"gain": 1})")), Error);
  }
}
