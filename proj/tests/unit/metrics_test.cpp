// metrics_test.cpp - overlap, distance and topology metrics and report output

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "callosim/augment.hpp"
#include "callosim/metrics.hpp"
#include "callosim/morphology.hpp"

using namespace callosim;
using namespace callosim::metrics;

namespace {

bool close(double a, double b, double rel = 1e-9) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

BinaryMask line_x(std::int64_t n, std::int64_t j, std::int64_t k, double spacing) {
  BinaryMask m(oracle::grid(n, spacing));
  for (std::int64_t i = 0; i < n; ++i) m(i, j, k) = 1;
  return m;
}

BinaryMask first_n(const Geometry& g, std::size_t from, std::size_t n) {
  BinaryMask m(g);
  for (std::size_t q = from; q < from + n; ++q) m[q] = 1;
  return m;
}

nlohmann::json rows_only(const SegReport& r) { return to_json(r).at("rows"); }

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("worked generalised Dice example is exactly one half") {
    const Geometry g = oracle::grid(Index3{400, 1, 1});
    LabelVolume gt(g), pred(g);
    for (std::size_t q = 0; q < 100; ++q) gt[q] = Tissue::CSF;
    for (std::size_t q = 50; q < 150; ++q) pred[q] = Tissue::CSF;
    for (std::size_t q = 200; q < 210; ++q) gt[q] = Tissue::GM;
    for (std::size_t q = 205; q < 215; ++q) pred[q] = Tissue::GM;
    const std::vector<Tissue> classes{Tissue::CSF, Tissue::GM};
    CHECK(generalized_dice(gt, pred, classes).value == 0.5);
    CHECK(oracle::gdsc(gt, pred, classes) == 0.5);
  }

  TEST_CASE("generalised Dice edge cases") {
    const auto v = oracle::random_labels(oracle::grid(8), 8, 1);
    CHECK(generalized_dice(v, v, all_classes()).value == 1.0);
    LabelVolume disjoint(v.geometry());
    for (std::size_t q = 0; q < v.size(); ++q) disjoint[q] = code(v[q]) == 0 ? Tissue::CSF : Tissue::Background;
    CHECK(generalized_dice(v, disjoint, all_classes()).value == 0.0);

    LabelVolume no_cc = v;
    for (auto& t : no_cc.buffer()) t = t == Tissue::CC ? Tissue::WM : t;
    const auto g = generalized_dice(no_cc, v, all_classes());
    CHECK(g.excluded == std::vector<Tissue>{Tissue::CC});
    CHECK(close(g.value, oracle::gdsc(no_cc, v, all_classes())));

    const LabelVolume bg(v.geometry());
    CHECK_THROWS_AS(generalized_dice(bg, v, all_classes()), Error);
    CHECK_THROWS_AS(generalized_dice(v, LabelVolume(oracle::grid(7)), all_classes()), Error);
  }

  TEST_CASE("single-class gDSC equals Dice") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
      const auto a = oracle::random_labels(oracle::grid(10), 3, rng());
      const auto b = oracle::random_labels(oracle::grid(10), 3, rng());
      const double g = generalized_dice(a, b, {Tissue::WM}).value;
      CHECK(close(g, *dice(extract_mask(a, Tissue::WM), extract_mask(b, Tissue::WM)).value));
    }
  }

  TEST_CASE("dice and volume similarity") {
    const Geometry g = oracle::grid(Index3{400, 1, 1});
    const auto a = first_n(g, 0, 100), b = first_n(g, 50, 100);
    CHECK(*dice(a, a).value == 1.0);
    CHECK(*dice(a, b).value == 0.5);
    const BinaryMask empty(g);
    const auto ge = dice(empty, a);
    CHECK(*ge.value == 0.0);
    CHECK(ge.flag == "gt-empty");
    CHECK(dice(a, empty).flag == "pred-empty");
    CHECK_FALSE(dice(empty, empty).defined());

    CHECK(*volume_similarity(a, b).value == 1.0);
    CHECK(*volume_similarity(first_n(g, 0, 100), first_n(g, 50, 300)).value == 0.5);
    CHECK(*volume_similarity(empty, a).value == 0.0);
    CHECK_FALSE(volume_similarity(empty, empty).defined());
  }

  TEST_CASE("percentile") {
    CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 50.0) == 2.5);
    CHECK(percentile({5.0}, 95.0) == 5.0);
    CHECK(percentile({0.0, 10.0}, 95.0) == doctest::Approx(9.5));
    CHECK_THROWS_AS(percentile({}, 50.0), Error);
  }

  TEST_CASE("hd95") {
    const auto a = oracle::random_mask(oracle::grid(8), 0.3, 3);
    CHECK(*hd95(a, a).value == 0.0);
    CHECK(*hd95(line_x(8, 2, 4, 0.5), line_x(8, 5, 4, 0.5)).value == 1.5);
    const auto undefined = hd95(a, BinaryMask(a.geometry()));
    CHECK_FALSE(undefined.defined());
    CHECK(undefined.flag == "pred-empty");
  }

  TEST_CASE("metrics match brute-force oracles on random pairs") {
    std::mt19937_64 rng(4);
    const Geometry g{{12, 12, 12}, {0.5, 0.7, 1.0}, {}};
    for (int t = 0; t < 20; ++t) {
      const auto gt = oracle::random_labels(g, 8, rng());
      const auto pred = oracle::random_labels(g, 8, rng());
      CHECK(close(generalized_dice(gt, pred, all_classes()).value, oracle::gdsc(gt, pred, all_classes())));
      for (Tissue c : all_classes()) {
        const auto a = extract_mask(gt, c), b = extract_mask(pred, c);
        CHECK(close(*dice(a, b).value, oracle::dice(a, b)));
        CHECK(close(*volume_similarity(a, b).value, oracle::volume_similarity(a, b)));
        CHECK(close(*hd95(a, b).value, oracle::hd95(a, b)));
      }
    }
  }

  TEST_CASE("Euler difference against the solid reference") {
    CHECK(euler_difference(oracle::ball(10, 3.5)) == 0);
    CHECK(euler_difference(mask_union(oracle::cube(10, {1, 1, 1}, {3, 3, 3}), oracle::cube(10, {6, 6, 6}, {8, 8, 8}))) == 1);
    CHECK(euler_difference(oracle::square_ring(12)) == 1);
    CHECK(euler_difference(BinaryMask(oracle::grid(4))) == 1);
    CHECK(euler_difference(oracle::shell(14, 5.5, 3.0)) == 1);
  }

  TEST_CASE("evaluate: identity, merge and a single perturbed class") {
    const auto& ph = oracle::small_phantom();
    const auto same = evaluate(ph, ph, all_classes(), false, "s");
    CHECK(same.gdsc.value == 1.0);
    REQUIRE(same.rows.size() == 8);
    for (const auto& row : same.rows) {
      CHECK(*row.dice.value == 1.0);
      CHECK(*row.hd95_mm.value == 0.0);
      CHECK(*row.vs.value == 1.0);
      CHECK(row.ed.has_value() == (row.label == Tissue::CC));
      if (row.ed) CHECK(*row.ed == 0);
    }

    const auto thick = augment::cc_thickening(ph, 1);
    const auto merged = evaluate(ph, thick, all_classes(), true);
    CHECK(merged.classes == feta_classes());
    CHECK(rows_only(merged) == rows_only(evaluate(ph, ph, all_classes(), true)));
    CHECK(rows_only(evaluate(ph, thick, all_classes(), false)) != rows_only(same));

    LabelVolume pred = ph;
    const auto gm = extract_mask(ph, Tissue::GM);
    const auto kept = erode(gm, StructuringElement::sphere(1));
    for (std::size_t q = 0; q < pred.size(); ++q) {
      if (gm[q] && !kept[q]) pred[q] = Tissue::Background;
    }
    const auto eroded = evaluate(ph, pred, all_classes(), false);
    for (std::size_t r = 0; r < eroded.rows.size(); ++r) {
      const bool is_gm = eroded.rows[r].label == Tissue::GM;
      CHECK((to_json(eroded)["rows"][r] == to_json(same)["rows"][r]) == !is_gm);
    }
  }

  TEST_CASE("evaluate handles absent classes and duplicates") {
    const auto& ph = oracle::small_phantom();
    const auto cca = augment::complete_agenesis(ph);
    const auto r = evaluate(cca, ph, {Tissue::CC, Tissue::WM, Tissue::CC}, false);
    CHECK(r.classes == std::vector<Tissue>{Tissue::WM, Tissue::CC});
    CHECK(r.gdsc.flag == "excluded:CC");
    CHECK(*r.rows[1].dice.value == 0.0);
    CHECK(r.rows[1].dice.flag == "gt-empty");
    CHECK_FALSE(r.rows[1].hd95_mm.defined());

    const auto none = evaluate(cca, cca, {Tissue::CC}, false);
    CHECK_FALSE(none.gdsc.defined());
    CHECK(none.gdsc.flag == "all-classes-absent");
    CHECK(*none.rows[0].ed == 1);
  }

  TEST_CASE("report serialisation") {
    const auto& ph = oracle::small_phantom();
    const auto cca = augment::complete_agenesis(ph);
    const auto r = evaluate(ph, cca, {Tissue::WM, Tissue::CC}, false, "sub,1");
    CHECK(csv_header() == "subject,class,label,dice,hd95_mm,vs,ed,gdsc,flags");
    const std::string csv = to_csv_rows(r);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("\"sub,1\",CC,8,0,,0,1,") != std::string::npos);
    CHECK(csv.find("dice:pred-empty;hd95:pred-empty;vs:pred-empty") != std::string::npos);

    const auto j = to_json(r);
    CHECK(j["rows"][1]["hd95_mm"]["value"].is_null());
    CHECK(j["rows"][1]["hd95_mm"]["flag"] == "pred-empty");
    CHECK(j["rows"][1]["ed"] == 1);
    CHECK(j["classes"] == nlohmann::json::array({"WM", "CC"}));
  }

  TEST_CASE("aggregate skips undefined entries") {
    const auto& ph = oracle::small_phantom();
    const auto cca = augment::complete_agenesis(ph);
    const auto a = evaluate(ph, ph, {Tissue::CC}, false);
    const auto b = evaluate(ph, cca, {Tissue::CC}, false);
    const auto agg = aggregate({a, b});
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].mean_dice == 0.5);
    CHECK(agg[0].n_dice == 2);
    CHECK(agg[0].n_hd95 == 1);
    CHECK(agg[0].excluded_hd95 == 1);
    CHECK(agg[0].mean_hd95_mm == 0.0);
  }
}
