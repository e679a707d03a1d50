// augment_test.cpp - label-space transforms, plans and their JSON forms

#include <cmath>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "callosim/augment.hpp"
#include "callosim/biomarkers.hpp"
#include "callosim/metrics.hpp"
#include "callosim/morphology.hpp"
#include "callosim/topology.hpp"

using namespace callosim;
using namespace callosim::augment;

namespace {

void fill(LabelVolume& v, Index3 lo, Index3 hi, Tissue t) {
  for (auto k = lo[2]; k <= hi[2]; ++k)
    for (auto j = lo[1]; j <= hi[1]; ++j)
      for (auto i = lo[0]; i <= hi[0]; ++i) v(i, j, k) = t;
}

/// WM block with a CC slab spanning PA slices 10..49.
LabelVolume cc_slab(std::int64_t is_height = 3) {
  LabelVolume v(oracle::grid(Index3{24, 60, 24}), Tissue::Background);
  fill(v, {2, 2, 2}, {21, 57, 21}, Tissue::WM);
  fill(v, {10, 10, 10}, {14, 49, 10 + is_height - 1}, Tissue::CC);
  return v;
}

std::int64_t count(const LabelVolume& v, Tissue t) { return std::int64_t(oracle::count(v, t)); }

std::int64_t delta(const LabelVolume& before, const LabelVolume& after, Tissue t) {
  return count(after, t) - count(before, t);
}

Box box_of(const LabelVolume& v, Tissue t) { return bounding_box(extract_mask(v, t)); }

AugmentationConfig only(Kind k, double p = 1.0) {
  AugmentationConfig c;
  c.p_augment = p;
  c.weights.fill(0.0);
  c.weights[static_cast<std::size_t>(k)] = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("augment") {
  TEST_CASE("complete agenesis") {
    LabelVolume v = cc_slab();
    const auto out = complete_agenesis(v);
    CHECK(count(out, Tissue::CC) == 0);
    CHECK(delta(v, out, Tissue::VM) == count(v, Tissue::CC));
    for (std::size_t q = 0; q < v.size(); ++q) {
      if (v[q] != Tissue::CC) CHECK(out[q] == v[q]);
    }
    CHECK(metrics::euler_difference(extract_mask(out, Tissue::CC)) == 1);
    CHECK_THROWS_AS(complete_agenesis(out), Error);
  }

  TEST_CASE("complete agenesis on the phantom") {
    const auto& ph = oracle::small_phantom();
    const auto out = complete_agenesis(ph);
    CHECK(delta(ph, out, Tissue::VM) == -delta(ph, out, Tissue::CC));
    CHECK(metrics::euler_difference(extract_mask(out, Tissue::CC)) == 1);
  }

  TEST_CASE("partial agenesis removes ceil(f E) end slices") {
    const auto v = cc_slab();
    const auto post = partial_agenesis(v, 0.25, End::Posterior);
    CHECK(box_of(post, Tissue::CC).lo[1] == 20);
    CHECK(box_of(post, Tissue::CC).extent(1) == 30);
    CHECK(delta(v, post, Tissue::VM) == -delta(v, post, Tissue::CC));

    const auto ant = partial_agenesis(v, 0.25, End::Anterior);
    CHECK(box_of(ant, Tissue::CC).hi[1] == 39);

    const auto tiny = partial_agenesis(v, 1e-6, End::Posterior);
    CHECK(box_of(tiny, Tissue::CC).lo[1] == 11);
    CHECK(delta(v, tiny, Tissue::CC) == -15);

    CHECK_THROWS_AS(partial_agenesis(v, 0.0, End::Posterior), Error);
    CHECK_THROWS_AS(partial_agenesis(v, 1.0, End::Posterior), Error);
  }

  TEST_CASE("partial agenesis on a flipped PA axis") {
    auto v = cc_slab();
    Geometry g = v.geometry();
    g.orientation.sign[1] = -1;
    const LabelVolume flipped(g, v.buffer());
    const auto out = partial_agenesis(flipped, 0.25, End::Posterior);
    // Posterior is now the high grid end.
    CHECK(box_of(out, Tissue::CC).hi[1] == 39);
  }

  TEST_CASE("partial agenesis halves the phantom length") {
    const auto& ph = oracle::small_phantom();
    const double before = biomarkers::cc_length(ph).mm;
    const double after = biomarkers::cc_length(partial_agenesis(ph, 0.5, End::Posterior)).mm;
    CHECK(std::abs(after - before / 2.0) <= ph.spacing()[1]);
  }

  TEST_CASE("thinning erodes with a vertical line") {
    const auto v = cc_slab(5);
    const auto out = cc_thinning(v, 1);
    const Box b = box_of(out, Tissue::CC);
    CHECK(b.lo[2] == 11);
    CHECK(b.hi[2] == 13);
    CHECK(is_subset(extract_mask(out, Tissue::CC), extract_mask(v, Tissue::CC)));
    CHECK(delta(v, out, Tissue::WM) == -delta(v, out, Tissue::CC));

    const auto many = cc_thinning(v, 50);
    CHECK(count(many, Tissue::CC) == 5 * 40);
    CHECK(cc_thinning(v, 0) == v);
  }

  TEST_CASE("thickening grows only into WM") {
    LabelVolume v(oracle::grid(7), Tissue::WM);
    v(3, 3, 3) = Tissue::CC;
    v(4, 3, 3) = Tissue::VM;
    v(3, 4, 3) = Tissue::GM;
    const auto out = cc_thickening(v, 1);
    CHECK(out(2, 3, 3) == Tissue::CC);
    CHECK(out(3, 3, 4) == Tissue::CC);
    CHECK(out(4, 3, 3) == Tissue::VM);
    CHECK(out(3, 4, 3) == Tissue::GM);
    CHECK(count(out, Tissue::CC) == 5);
    CHECK(cc_thickening(v, 0) == v);

    const auto& ph = oracle::small_phantom();
    const auto big = cc_thickening(ph, 2);
    CHECK(count(big, Tissue::CC) > count(ph, Tissue::CC));
    CHECK(delta(ph, big, Tissue::GM) == 0);
    CHECK(delta(ph, big, Tissue::CSF) == 0);
    CHECK(delta(ph, big, Tissue::CC) == -delta(ph, big, Tissue::WM));
  }

  TEST_CASE("kink field: identity, locality and continuity") {
    const auto v = cc_slab();
    CHECK(cc_kink(v, 0.0, 1.0, 0.3) == v);

    const double amp = 2.0, cycles = 1.5;
    const auto field = kink_field(v, amp, cycles, 0.7);
    const Box core = box_of(v, Tissue::CC);
    const std::int64_t m = std::int64_t(std::ceil(amp)) + 2;
    CHECK(field.roi() == core.expanded({m, m, m}).clipped(v.dims()));
    CHECK(field.max_magnitude() <= amp + 1e-6);

    const double bound = amp * (2.0 * std::numbers::pi * cycles / double(core.extent(1)) + std::numbers::pi / 4.0);
    double worst = 0.0;
    const Box r = field.roi().expanded({1, 1, 1}).clipped(v.dims());
    for (auto k = r.lo[2]; k < r.hi[2]; ++k)
      for (auto j = r.lo[1]; j < r.hi[1]; ++j)
        for (auto i = r.lo[0]; i < r.hi[0]; ++i) {
          const auto u = field.at(i, j, k);
          for (const Index3& o : {Index3{1, 0, 0}, Index3{0, 1, 0}, Index3{0, 0, 1}}) {
            const auto w = field.at(i + o[0], j + o[1], k + o[2]);
            double d2 = 0;
            for (int a = 0; a < 3; ++a) d2 += double(u[a] - w[a]) * double(u[a] - w[a]);
            worst = std::max(worst, std::sqrt(d2));
          }
        }
    CHECK(worst <= bound + 1e-5);
    CHECK(field.at(0, 0, 0)[2] == 0.0f);
    CHECK(field.at(core.lo[0], core.lo[1], core.lo[2])[0] == 0.0f);

    const auto out = cc_kink(v, amp, cycles, 0.7);
    for (std::int64_t k = 0; k < v.dims()[2]; ++k)
      for (std::int64_t j = 0; j < v.dims()[1]; ++j)
        for (std::int64_t i = 0; i < v.dims()[0]; ++i)
          if (!field.roi().contains(i, j, k)) CHECK(out(i, j, k) == v(i, j, k));
  }

  TEST_CASE("kink keeps the phantom CC count and PA extent") {
    const auto& ph = oracle::small_phantom();
    const auto out = cc_kink(ph, 2.0, 1.0, 0.0);
    const double ratio = double(count(out, Tissue::CC)) / double(count(ph, Tissue::CC));
    CHECK(std::abs(ratio - 1.0) <= 0.10);
    CHECK(std::abs(biomarkers::cc_length(out).mm - biomarkers::cc_length(ph).mm) <= ph.spacing()[1]);
  }

  TEST_CASE("cortex thickening and thinning sandwiches") {
    LabelVolume v(oracle::grid(Index3{10, 6, 6}), Tissue::WM);
    fill(v, {0, 0, 0}, {3, 5, 5}, Tissue::CSF);
    fill(v, {4, 0, 0}, {5, 5, 5}, Tissue::GM);

    const auto thick = cortex_thickening(v, 1);
    for (std::int64_t k = 0; k < 6; ++k)
      for (std::int64_t j = 0; j < 6; ++j) {
        CHECK(thick(6, j, k) == Tissue::GM);
        CHECK(thick(7, j, k) == Tissue::WM);
        CHECK(thick(3, j, k) == Tissue::CSF);
      }
    CHECK(delta(v, thick, Tissue::GM) == -delta(v, thick, Tissue::WM));
    CHECK(cortex_thickening(v, 0) == v);

    const auto thin = cortex_thinning(v, 1);
    for (std::int64_t k = 0; k < 6; ++k)
      for (std::int64_t j = 0; j < 6; ++j) {
        CHECK(thin(4, j, k) == Tissue::CSF);
        CHECK(thin(5, j, k) == Tissue::GM);
      }
    CHECK(delta(v, thin, Tissue::CSF) == -delta(v, thin, Tissue::GM));
    CHECK(delta(v, thin, Tissue::WM) == 0);
    CHECK(cortex_thinning(v, 0) == v);
  }

  TEST_CASE("cortex thinning only touches GM near CSF") {
    const auto& ph = oracle::small_phantom(2);
    const auto out = cortex_thinning(ph, 1);
    const auto near_csf = oracle::dilate(extract_mask(ph, Tissue::CSF), oracle::sphere_offsets(1));
    std::size_t changed = 0;
    for (std::size_t q = 0; q < ph.size(); ++q) {
      if (out[q] == ph[q]) continue;
      ++changed;
      CHECK(ph[q] == Tissue::GM);
      CHECK(out[q] == Tissue::CSF);
      CHECK(near_csf[q] == 1);
    }
    CHECK(changed > 0);
  }

  TEST_CASE("cortex smoothing closes a groove") {
    LabelVolume v(oracle::grid(16), Tissue::Background);
    fill(v, {1, 1, 1}, {14, 14, 14}, Tissue::CSF);
    fill(v, {3, 2, 2}, {12, 13, 6}, Tissue::WM);
    fill(v, {3, 2, 7}, {12, 13, 8}, Tissue::GM);
    fill(v, {8, 2, 7}, {8, 13, 8}, Tissue::CSF);

    const auto out = cortex_smoothing(v, 1);
    BinaryMask tissue(v.geometry());
    for (std::size_t q = 0; q < v.size(); ++q) tissue[q] = v[q] == Tissue::GM || v[q] == Tissue::WM;
    const auto offsets = oracle::sphere_offsets(1);
    const auto closed = oracle::erode(oracle::dilate(tissue, offsets), offsets);
    LabelVolume want = v;
    for (std::size_t q = 0; q < v.size(); ++q) {
      if (closed[q] && v[q] == Tissue::CSF) want[q] = Tissue::GM;
    }
    CHECK(out == want);
    for (std::int64_t j = 3; j <= 12; ++j) CHECK(out(8, j, 7) == Tissue::GM);
    CHECK(cortex_smoothing(v, 0) == v);

    LabelVolume convex(oracle::grid(16), Tissue::CSF);
    fill(convex, {3, 3, 3}, {12, 12, 12}, Tissue::GM);
    fill(convex, {5, 5, 5}, {10, 10, 10}, Tissue::WM);
    CHECK(cortex_smoothing(convex, 1) == convex);
    CHECK(cortex_smoothing(convex, 2) == convex);
  }

  TEST_CASE("posterior fossa hypoplasia") {
    const auto& ph = oracle::small_phantom();
    CHECK(posterior_fossa_hypoplasia(ph, 0) == ph);
    const auto out = posterior_fossa_hypoplasia(ph, 2);
    CHECK(count(out, Tissue::CBM) <= count(ph, Tissue::CBM));
    CHECK(count(out, Tissue::BSM) <= count(ph, Tissue::BSM));
    CHECK(count(out, Tissue::CBM) < count(ph, Tissue::CBM));
    CHECK(count_components(extract_mask(out, Tissue::CBM), Connectivity::Vertices) == 1);
    CHECK(count_components(extract_mask(out, Tissue::BSM), Connectivity::Vertices) == 1);
    CHECK(delta(ph, out, Tissue::CSF) ==
          -(delta(ph, out, Tissue::CBM) + delta(ph, out, Tissue::BSM)));
  }

  TEST_CASE("hypoplasia never splits a bridged cerebellum") {
    LabelVolume v(oracle::grid(Index3{24, 14, 14}), Tissue::CSF);
    fill(v, {2, 2, 2}, {6, 6, 6}, Tissue::CBM);
    fill(v, {7, 4, 4}, {9, 4, 4}, Tissue::CBM);
    fill(v, {10, 2, 2}, {14, 6, 6}, Tissue::CBM);
    fill(v, {2, 7, 2}, {6, 11, 6}, Tissue::BSM);
    for (int it : {1, 2, 3, 5}) {
      const auto out = posterior_fossa_hypoplasia(v, it);
      CHECK(oracle::count_components(extract_mask(out, Tissue::CBM), 26) == 1);
      CHECK(count(out, Tissue::CBM) == count(v, Tissue::CBM));
    }
  }

  TEST_CASE("ventriculomegaly on a spherical blob") {
    LabelVolume v(oracle::grid(40), Tissue::Background);
    fill(v, {2, 2, 2}, {37, 37, 37}, Tissue::WM);
    fill(v, {33, 33, 33}, {36, 36, 36}, Tissue::GM);
    fill(v, {3, 3, 3}, {5, 5, 5}, Tissue::CC);
    for (std::int64_t k = 0; k < 40; ++k)
      for (std::int64_t j = 0; j < 40; ++j)
        for (std::int64_t i = 0; i < 40; ++i) {
          const double d2 = (i - 19.5) * (i - 19.5) + (j - 20.0) * (j - 20.0) + (k - 20.0) * (k - 20.0);
          if (d2 <= 16.0) v(i, j, k) = Tissue::VM;
        }
    CHECK(midplane(v) == 19.5);
    CHECK(ventriculomegaly(v, 0.0, 5.0, Laterality::Bilateral) == v);

    for (auto side : {Laterality::Bilateral, Laterality::Left, Laterality::Right}) {
      const double sigma = 5.0;
      const auto centroids = ventricle_centroids(v, side);
      CHECK(centroids.size() == (side == Laterality::Bilateral ? 2u : 1u));
      const auto out = ventriculomegaly(v, 1.0, sigma, side);
      CHECK(count(out, Tissue::VM) > count(v, Tissue::VM));
      for (std::int64_t k = 0; k < 40; ++k)
        for (std::int64_t j = 0; j < 40; ++j)
          for (std::int64_t i = 0; i < 40; ++i) {
            bool far = true;
            for (const auto& c : centroids) {
              const double d = std::hypot(double(i) - c[0], double(j) - c[1], double(k) - c[2]);
              far = far && d > 4.0 * sigma;
            }
            if (far) CHECK(out(i, j, k) == v(i, j, k));
          }
      CHECK(oracle::count(out, Tissue::GM) == oracle::count(v, Tissue::GM));
      CHECK(oracle::count(out, Tissue::CC) == oracle::count(v, Tissue::CC));
    }
    const auto left = ventricle_centroids(v, Laterality::Left);
    CHECK(left[0][0] < 19.5);
  }

  TEST_CASE("ventriculomegaly enlarges phantom ventricles") {
    const auto& ph = oracle::small_phantom();
    const auto out = ventriculomegaly(ph, 3.0, 8.0, Laterality::Bilateral);
    CHECK(count(out, Tissue::VM) > count(ph, Tissue::VM));
    LabelVolume no_vm = ph;
    for (auto& t : no_vm.buffer()) t = t == Tissue::VM ? Tissue::WM : t;
    CHECK_THROWS_AS(ventriculomegaly(no_vm, 1.0, 5.0, Laterality::Left), Error);
  }

  TEST_CASE("transforms without their target structure throw") {
    const LabelVolume wm(oracle::grid(6), Tissue::WM);
    auto code_of = [](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::InvalidArgument;
    };
    CHECK(code_of([&] { (void)partial_agenesis(wm, 0.5, End::Anterior); }) == ErrorCode::NoTargetStructure);
    CHECK(code_of([&] { (void)cc_thinning(wm, 1); }) == ErrorCode::NoTargetStructure);
    CHECK(code_of([&] { (void)cc_kink(wm, 1, 1, 0); }) == ErrorCode::NoTargetStructure);
    CHECK(code_of([&] { (void)cortex_thinning(wm, 1); }) == ErrorCode::NoTargetStructure);
    CHECK(code_of([&] { (void)posterior_fossa_hypoplasia(wm, 1); }) == ErrorCode::NoTargetStructure);
  }

  TEST_CASE("plan sampling") {
    AugmentationConfig never;
    never.p_augment = 0.0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto plan = sample_plan(never, s);
      CHECK_FALSE(plan.applied);
      CHECK(plan.steps.empty());
    }
    const auto cca = only(Kind::CompleteAgenesis);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto plan = sample_plan(cca, s);
      REQUIRE(plan.steps.size() == 1);
      CHECK(plan.steps[0].kind == Kind::CompleteAgenesis);
    }

    AugmentationConfig all;
    all.p_augment = 1.0;
    all.max_transforms = 4;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto plan = sample_plan(all, s);
      CHECK(plan.seed == s);
      CHECK(!plan.steps.empty());
      CHECK(plan.steps.size() <= 4u);
      std::set<Kind> kinds;
      for (const auto& st : plan.steps) kinds.insert(st.kind);
      CHECK(kinds.size() == plan.steps.size());
      const auto again = sample_plan(all, s);
      CHECK(to_json(again) == to_json(plan));
    }
  }

  TEST_CASE("sampled parameters respect their ranges") {
    AugmentationConfig c;
    c.p_augment = 1.0;
    c.max_transforms = kKindCount;
    for (std::uint64_t s = 0; s < 100; ++s) {
      for (const auto& st : sample_plan(c, s).steps) {
        if (const auto* p = std::get_if<PartialAgenesisParams>(&st.params)) {
          CHECK((p->fraction >= 0.2 && p->fraction <= 0.8));
        } else if (const auto* k = std::get_if<KinkParams>(&st.params)) {
          CHECK((k->amplitude_mm >= 0.5 && k->amplitude_mm <= 3.0));
          CHECK((k->phase >= 0.0 && k->phase < 2.0 * std::numbers::pi));
        } else if (const auto* t = std::get_if<ThinningParams>(&st.params)) {
          CHECK((t->iterations >= 1 && t->iterations <= 3));
        } else if (const auto* vm = std::get_if<VentriculomegalyParams>(&st.params)) {
          CHECK((vm->sigma_mm >= 4.0 && vm->sigma_mm <= 10.0));
        }
      }
    }
  }

  TEST_CASE("plan application") {
    const auto& ph = oracle::small_phantom();
    const AugmentationPlan empty{3, false, {}};
    CHECK(apply_plan(ph, empty).volume == ph);

    const AugmentationPlan two{3, true, {{Kind::CompleteAgenesis, CompleteAgenesisParams{}}, {Kind::CcThinning, ThinningParams{2}}}};
    const auto r = apply_plan(ph, two);
    CHECK(r.volume == complete_agenesis(ph));
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].find("cc_thinning") != std::string::npos);

    const Step mismatched{Kind::CcThinning, KinkParams{1, 1, 0}};
    CHECK_THROWS_AS(apply_step(ph, mismatched), Error);

    AugmentationConfig c;
    c.p_augment = 1.0;
    for (std::uint64_t s = 0; s < 6; ++s) {
      const auto out = apply_plan(ph, sample_plan(c, s)).volume;
      CHECK(out.geometry() == ph.geometry());
      std::uint8_t top = 0;
      for (auto t : out.buffer()) top = std::max(top, code(t));
      CHECK(top <= kMaxTissueCode);
    }
  }

  TEST_CASE("config validation and JSON") {
    AugmentationConfig c;
    CHECK_NOTHROW(c.validate());
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    auto bad = [](auto mutate) {
      AugmentationConfig x;
      mutate(x);
      CHECK_THROWS_AS(x.validate(), Error);
    };
    bad([](AugmentationConfig& x) { x.p_augment = 1.5; });
    bad([](AugmentationConfig& x) { x.max_transforms = 0; });
    bad([](AugmentationConfig& x) { x.weights.fill(0.0); });
    bad([](AugmentationConfig& x) { x.weights[2] = -1.0; });
    bad([](AugmentationConfig& x) { x.ranges.partial_fraction = {0.0, 0.5}; });
    bad([](AugmentationConfig& x) { x.ranges.thickening_radius = {3, 1}; });
    bad([](AugmentationConfig& x) { x.ranges.thinning_iterations = {1, 2.5}; });
    bad([](AugmentationConfig& x) { x.ranges.ventriculomegaly_sigma_mm = {0, 2}; });

    nlohmann::json j = to_json(c);
    j["surprise"] = 1;
    CHECK_THROWS_AS(config_from_json(j), Error);
    j = nlohmann::json::parse(R"({"p_augment": 1.0, "weights": {"cc_kink": 2.0}, "ranges": {"kink_cycles": [1, 1]}})");
    const auto partial = config_from_json(j);
    CHECK(partial.p_augment == 1.0);
    CHECK(partial.weights[static_cast<std::size_t>(Kind::CcKink)] == 2.0);
    CHECK(partial.ranges.kink_cycles.max == 1.0);

    c.p_augment = 1.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto plan = sample_plan(c, s);
      CHECK(to_json(plan_from_json(to_json(plan))) == to_json(plan));
    }
  }

  TEST_CASE("names and describe") {
    for (int k = 0; k < kKindCount; ++k) {
      const auto kind = static_cast<Kind>(k);
      CHECK(kind_from_name(kind_name(kind)) == kind);
    }
    CHECK_FALSE(kind_from_name("cc_melting").has_value());
    CHECK(describe({Kind::CcThinning, ThinningParams{2}}) == "cc_thinning(iterations=2)");
    CHECK(describe({Kind::CompleteAgenesis, CompleteAgenesisParams{}}) == "complete_agenesis()");
    CHECK_THROWS_AS(Severity(1.5), Error);
    CHECK(Severity(0.5).map(2.0, 4.0) == 3.0);
  }
}
