// biomarkers_test.cpp - CC length, volume, growth deviation and quadratic fits

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "callosim/augment.hpp"
#include "callosim/biomarkers.hpp"

using namespace callosim;
using namespace callosim::biomarkers;

namespace {

LabelVolume cc_between(std::int64_t lo, std::int64_t hi, double spacing) {
  LabelVolume v(oracle::grid(Index3{8, 64, 8}, {spacing, spacing, spacing}), Tissue::WM);
  for (std::int64_t j = lo; j <= hi; ++j) v(3, j, 4) = Tissue::CC;
  v(4, (lo + hi) / 2, 4) = Tissue::CC;
  return v;
}

bool rel_close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

}  // namespace

TEST_SUITE("biomarkers") {
  TEST_CASE("length is the posterior-anterior projection extent") {
    CHECK(cc_length(cc_between(10, 50, 0.5)).mm == 20.0);
    const auto empty = cc_length(LabelVolume(oracle::grid(4), Tissue::WM));
    CHECK(empty.mm == 0.0);
    CHECK(empty.cc_absent);

    Geometry g{{64, 8, 8}, {0.5, 0.5, 0.5}, {}};
    g.orientation.axis = {AnatomicalAxis::PosteriorAnterior, AnatomicalAxis::LeftRight,
                          AnatomicalAxis::InferiorSuperior};
    LabelVolume turned(g, Tissue::WM);
    for (std::int64_t i = 5; i <= 25; ++i) turned(i, 2, 2) = Tissue::CC;
    CHECK(cc_length(turned).mm == 10.0);
  }

  TEST_CASE("phantom length matches the arch span") {
    const auto& ph = oracle::small_phantom();
    const phantom::PhantomSpec spec = phantom::PhantomSpec::small(1);
    CHECK(std::abs(cc_length(ph).mm - spec.corpus_callosum.span) <= ph.spacing()[1]);
    const auto kinked = augment::cc_kink(ph, 2.0, 1.0, 0.0);
    CHECK(std::abs(cc_length(kinked).mm - cc_length(ph).mm) <= ph.spacing()[1]);
  }

  TEST_CASE("volume") {
    LabelVolume v(oracle::grid(20, 0.5), Tissue::WM);
    for (std::size_t q = 0; q < 1000; ++q) v[q] = Tissue::CC;
    CHECK(cc_volume(v) == 125.0);
    CHECK(cc_volume(augment::complete_agenesis(v)) == 0.0);
    CHECK(cc_volume(LabelVolume(oracle::grid(3))) == 0.0);
  }

  TEST_CASE("delta length") {
    const auto a = cc_between(10, 50, 0.5);
    CHECK(delta_length(a, a).mm == 0.0);
    const auto b = cc_between(10, 46, 0.5);
    CHECK(delta_length(b, a).mm == 2.0);
    const LabelVolume none(a.geometry(), Tissue::WM);
    const auto d = delta_length(a, none);
    CHECK(d.gt_cc_absent);
    CHECK(d.mm == 20.0);
    CHECK_THROWS_AS(delta_length(a, LabelVolume(oracle::grid(5))), Error);
  }

  TEST_CASE("growth curves") {
    const auto c = NormativeCurve::quadratic({0.0, 0.0, 0.04}, {20.0, 40.0}, "unit");
    CHECK(c(30.0) == doctest::Approx(36.0));
    CHECK(delta_growth(c(25.0), 25.0, c) == 0.0);
    CHECK(delta_growth(c(30.0) - 2.0, 30.0, c) == doctest::Approx(2.0));
    try {
      (void)c(45.0);
      FAIL("expected GAOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GAOutOfRange);
    }

    const auto t = NormativeCurve::table({{20.0, 10.0}, {30.0, 30.0}, {40.0, 35.0}}, "unit");
    CHECK(t(25.0) == 20.0);
    CHECK(t(32.0) == 31.0);
    CHECK(t(40.0) == 35.0);
    CHECK(t(20.0) == 10.0);
    CHECK(delta_growth(t(27.5), 27.5, t) == 0.0);

    CHECK_THROWS_AS(NormativeCurve::quadratic({0.0, -1.0, 0.0}, {20.0, 40.0}, ""), Error);
    CHECK_THROWS_AS(NormativeCurve::quadratic({0.0, 1.0, 0.0}, {40.0, 20.0}, ""), Error);
    CHECK_THROWS_AS(NormativeCurve::table({{20.0, 10.0}, {30.0, 9.0}}, ""), Error);
    CHECK_THROWS_AS(NormativeCurve::table({{20.0, 10.0}}, ""), Error);

    const auto synthetic = NormativeCurve::synthetic_default();
    CHECK(synthetic.source().find("not clinical") != std::string::npos);
    for (const auto& curve : {c, t, synthetic}) {
      const auto back = curve_from_json(to_json(curve));
      CHECK(to_json(back) == to_json(curve));
    }
    CHECK_THROWS_AS(curve_from_json(nlohmann::json::parse(R"({"kind": "spline"})")), Error);
  }

  TEST_CASE("quadratic fit") {
    std::vector<std::pair<double, double>> exact;
    for (double ga = 20; ga <= 40; ga += 2) exact.emplace_back(ga, ga * ga);
    const auto f = fit_growth_quadratic(exact);
    CHECK(std::abs(f.coefficients[0]) < 1e-8);
    CHECK(std::abs(f.coefficients[1]) < 1e-9);
    CHECK(f.coefficients[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.rms_residual < 1e-9);

    const auto three = fit_growth_quadratic({{21, 5}, {30, 19}, {38, 22}});
    CHECK(three.rms_residual < 1e-9);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ga(20.0, 40.0);
    std::normal_distribution<double> noise(0.0, 0.8);
    for (int t = 0; t < 5; ++t) {
      std::vector<std::pair<double, double>> pts;
      for (int n = 0; n < 50; ++n) {
        const double x = ga(rng);
        pts.emplace_back(x, -30.0 + 3.2 * x - 0.03 * x * x + noise(rng));
      }
      const auto got = fit_growth_quadratic(pts).coefficients;
      const auto want = oracle::quadratic_qr(pts);
      for (int c = 0; c < 3; ++c) CHECK(rel_close(got[c], want[c], 1e-6));
    }

    CHECK_THROWS_AS(fit_growth_quadratic({{20, 1}, {30, 2}}), Error);
    CHECK_THROWS_AS(fit_growth_quadratic({{20, 1}, {20, 2}, {30, 2}, {30, 1}}), Error);
  }

  TEST_CASE("report") {
    const auto& ph = oracle::small_phantom();
    const auto curve = NormativeCurve::synthetic_default();
    const auto cca = augment::complete_agenesis(ph);

    const auto r = measure(ph, 30.0, &curve, &ph, "s1");
    CHECK(r.cc_length_mm == cc_length(ph).mm);
    CHECK(*r.delta_length_mm == 0.0);
    CHECK(*r.delta_growth_mm == doctest::Approx(std::abs(cc_length(ph).mm - curve(30.0))));
    CHECK(r.flags.empty());

    const auto absent = measure(cca, 30.0, &curve, &ph);
    CHECK_FALSE(absent.delta_growth_mm.has_value());
    CHECK(absent.flags == std::vector<std::string>{"cc-absent"});

    const auto vs_cca = measure(ph, std::nullopt, nullptr, &cca);
    CHECK(vs_cca.flags == std::vector<std::string>{"gt-cc-absent"});
    CHECK(*vs_cca.delta_length_mm == cc_length(ph).mm);

    CHECK(measure(ph, 30.0, nullptr, nullptr).flags == std::vector<std::string>{"no-curve"});
    CHECK_THROWS_AS(measure(ph, 50.0, &curve, nullptr), Error);

    CHECK(csv_header() == "subject,GA,length_mm,volume_mm3,delta_length_mm,delta_growth_mm,flags");
    const std::string row = to_csv_row(absent);
    CHECK(row.rfind(",30,0,0,", 0) == 0);
    CHECK(row.find(",,cc-absent\n") != std::string::npos);
    const auto j = to_json(r);
    CHECK(j["subject"] == "s1");
    CHECK(j["GA"] == 30.0);
    CHECK_FALSE(to_json(absent).contains("delta_growth_mm"));
  }
}
