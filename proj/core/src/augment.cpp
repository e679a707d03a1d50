#include "callosim/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "callosim/morphology.hpp"
#include "callosim/random.hpp"
#include "callosim/topology.hpp"

namespace callosim::augment {

namespace {

constexpr std::int64_t kKinkFalloff = 2;

using nlohmann::json;

BinaryMask require(const LabelVolume& vol, Tissue t, std::string_view what) {
  BinaryMask m = extract_mask(vol, t);
  if (foreground_box(m).empty()) {
    throw Error(ErrorCode::NoTargetStructure, std::string(what) + ": no " + std::string(tissue_name(t)) + " voxels");
  }
  return m;
}

/// Relabels voxels set in `mask` whose current label is `from` to `to`.
void relabel(LabelVolume& vol, const BinaryMask& mask, Tissue from, Tissue to) {
  for (std::size_t n = 0; n < vol.size(); ++n) {
    if (mask[n] && vol[n] == from) vol[n] = to;
  }
}

}  // namespace

// ------------------------------------------------------------------ CC

LabelVolume complete_agenesis(const LabelVolume& vol) {
  require(vol, Tissue::CC, "complete_agenesis");
  LabelVolume out = vol;
  for (auto& v : out.buffer()) {
    if (v == Tissue::CC) v = Tissue::VM;
  }
  return out;
}

LabelVolume partial_agenesis(const LabelVolume& vol, double fraction, End end) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "partial_agenesis fraction must lie in (0, 1)");
  }
  const BinaryMask cc = require(vol, Tissue::CC, "partial_agenesis");
  const Box box = bounding_box(cc);
  const int g = vol.orientation().grid_axis(AnatomicalAxis::PosteriorAnterior);
  const std::int64_t extent = box.extent(g);
  // The tolerance keeps products like 0.3 * 10 from rounding up a slice.
  const auto removed = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::ceil(fraction * double(extent) - 1e-9)), 1, extent);
  const bool low_grid_end = (end == End::Posterior) == (vol.orientation().sign[g] > 0);
  const std::int64_t lo = low_grid_end ? box.lo[g] : box.hi[g] - removed + 1;
  const std::int64_t hi = low_grid_end ? box.lo[g] + removed - 1 : box.hi[g];

  LabelVolume out = vol;
  for (std::int64_t k = box.lo[2]; k <= box.hi[2]; ++k) {
    for (std::int64_t j = box.lo[1]; j <= box.hi[1]; ++j) {
      for (std::int64_t i = box.lo[0]; i <= box.hi[0]; ++i) {
        const Index3 p{i, j, k};
        if (p[g] < lo || p[g] > hi) continue;
        auto& v = out(i, j, k);
        if (v == Tissue::CC) v = Tissue::VM;
      }
    }
  }
  return out;
}

LabelVolume cc_thinning(const LabelVolume& vol, int iterations) {
  if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "cc_thinning iterations must be >= 0");
  BinaryMask cc = require(vol, Tissue::CC, "cc_thinning");
  const auto se = StructuringElement::line(AnatomicalAxis::InferiorSuperior, 3);
  BinaryMask kept = cc;
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next = erode(kept, se);
    if (foreground_box(next).empty()) break;
    kept = std::move(next);
  }
  LabelVolume out = vol;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (cc[n] && !kept[n]) out[n] = Tissue::WM;
  }
  return out;
}

LabelVolume cc_thickening(const LabelVolume& vol, double radius) {
  const BinaryMask cc = require(vol, Tissue::CC, "cc_thickening");
  LabelVolume out = vol;
  relabel(out, dilate(cc, StructuringElement::sphere(radius)), Tissue::WM, Tissue::CC);
  return out;
}

DisplacementField kink_field(const LabelVolume& vol, double amplitude_mm, double cycles, double phase) {
  if (!std::isfinite(amplitude_mm) || amplitude_mm < 0.0 || !(cycles > 0.0) || !std::isfinite(phase)) {
    throw Error(ErrorCode::InvalidArgument, "cc_kink needs amplitude >= 0, cycles > 0, finite phase");
  }
  const BinaryMask cc = require(vol, Tissue::CC, "cc_kink");
  const Geometry& g = vol.geometry();
  if (amplitude_mm == 0.0) return DisplacementField::zero(g);

  const Box core = bounding_box(cc);
  Index3 margin{};
  for (int a = 0; a < 3; ++a) {
    margin[a] = static_cast<std::int64_t>(std::ceil(amplitude_mm / g.spacing[a])) + kKinkFalloff;
  }
  const Box roi = core.expanded(margin).clipped(g.dims);
  DisplacementField field(g, roi);

  const int pa = g.orientation.grid_axis(AnatomicalAxis::PosteriorAnterior);
  const int is = g.orientation.grid_axis(AnatomicalAxis::InferiorSuperior);
  const double is_sign = g.orientation.sign[is];
  const std::int64_t posterior = g.orientation.sign[pa] > 0 ? core.lo[pa] : core.hi[pa];
  const double extent = double(core.extent(pa));
  const double omega = 2.0 * std::numbers::pi * cycles / extent;

  // Per-axis weight: 1 out to ceil(amplitude / spacing) past the core, then a
  // raised-cosine fall to 0 over the last kKinkFalloff voxels.
  std::array<std::vector<double>, 3> taper;
  for (int a = 0; a < 3; ++a) {
    taper[a].resize(static_cast<std::size_t>(roi.extent(a)));
    const std::int64_t flat = margin[a] - kKinkFalloff;
    for (std::int64_t p = roi.lo[a]; p <= roi.hi[a]; ++p) {
      const std::int64_t d = p < core.lo[a] ? core.lo[a] - p : p > core.hi[a] ? p - core.hi[a] : 0;
      const double x = double(std::max<std::int64_t>(d - flat, 0)) / double(kKinkFalloff);
      taper[a][static_cast<std::size_t>(p - roi.lo[a])] = 0.5 * (1.0 + std::cos(std::numbers::pi * x));
    }
  }

  for (std::int64_t k = roi.lo[2]; k <= roi.hi[2]; ++k) {
    for (std::int64_t j = roi.lo[1]; j <= roi.hi[1]; ++j) {
      for (std::int64_t i = roi.lo[0]; i <= roi.hi[0]; ++i) {
        const Index3 p{i, j, k};
        const double t = g.orientation.sign[pa] > 0 ? double(p[pa] - posterior) : double(posterior - p[pa]);
        const double w = taper[0][static_cast<std::size_t>(i - roi.lo[0])] *
                         taper[1][static_cast<std::size_t>(j - roi.lo[1])] *
                         taper[2][static_cast<std::size_t>(k - roi.lo[2])];
        Vec3f u{0, 0, 0};
        u[is] = static_cast<float>(is_sign * amplitude_mm * std::sin(omega * t + phase) * w);
        field.ref(i, j, k) = u;
      }
    }
  }
  return field;
}

LabelVolume cc_kink(const LabelVolume& vol, double amplitude_mm, double cycles, double phase) {
  return warp_labels(vol, kink_field(vol, amplitude_mm, cycles, phase));
}

// -------------------------------------------------------------- cortex

LabelVolume cortex_thickening(const LabelVolume& vol, double radius) {
  const BinaryMask gm = require(vol, Tissue::GM, "cortex_thickening");
  LabelVolume out = vol;
  relabel(out, dilate(gm, StructuringElement::sphere(radius)), Tissue::WM, Tissue::GM);
  return out;
}

LabelVolume cortex_thinning(const LabelVolume& vol, double radius) {
  require(vol, Tissue::GM, "cortex_thinning");
  const BinaryMask csf = require(vol, Tissue::CSF, "cortex_thinning");
  LabelVolume out = vol;
  relabel(out, dilate(csf, StructuringElement::sphere(radius)), Tissue::GM, Tissue::CSF);
  return out;
}

LabelVolume cortex_smoothing(const LabelVolume& vol, double radius) {
  const BinaryMask gm = require(vol, Tissue::GM, "cortex_smoothing");
  const auto se = StructuringElement::sphere(radius);
  const BinaryMask tissue = mask_union(gm, extract_mask(vol, Tissue::WM));
  const BinaryMask closed = erode(dilate(tissue, se), se);
  LabelVolume out = vol;
  relabel(out, closed, Tissue::CSF, Tissue::GM);
  return out;
}

// ------------------------------------------------------ posterior fossa

namespace {

bool touches(const BinaryMask& a, const BinaryMask& b) {
  const Box box = foreground_box(a);
  if (box.empty()) return false;
  const BinaryMask grown = dilate(a, StructuringElement::box({1, 1, 1}));
  const Box region = box.expanded({1, 1, 1}).clipped(a.dims());
  for (std::int64_t k = region.lo[2]; k <= region.hi[2]; ++k) {
    for (std::int64_t j = region.lo[1]; j <= region.hi[1]; ++j) {
      for (std::int64_t i = region.lo[0]; i <= region.hi[0]; ++i) {
        if (grown(i, j, k) && b(i, j, k)) return true;
      }
    }
  }
  return false;
}

}  // namespace

LabelVolume posterior_fossa_hypoplasia(const LabelVolume& vol, int iterations) {
  if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "hypoplasia iterations must be >= 0");
  BinaryMask cbm = require(vol, Tissue::CBM, "posterior_fossa_hypoplasia");
  BinaryMask bsm = require(vol, Tissue::BSM, "posterior_fossa_hypoplasia");
  const BinaryMask cbm0 = cbm, bsm0 = bsm;
  const auto se = StructuringElement::sphere(1.0);

  for (int it = 0; it < iterations; ++it) {
    const bool adjacent = touches(cbm, bsm);
    const BinaryMask core = erode(mask_union(cbm, bsm), se);
    BinaryMask next_cbm = mask_intersection(core, cbm);
    BinaryMask next_bsm = mask_intersection(core, bsm);
    auto acceptable = [&](const BinaryMask& candidate, const BinaryMask& other) {
      if (count_components(candidate, Connectivity::Vertices) != 1) return false;
      return !adjacent || touches(candidate, other);
    };
    const bool keep_cbm = acceptable(next_cbm, next_bsm);
    const bool keep_bsm = acceptable(next_bsm, next_cbm);
    if (!keep_cbm && !keep_bsm) break;
    if (keep_cbm) cbm = std::move(next_cbm);
    if (keep_bsm) bsm = std::move(next_bsm);
  }

  LabelVolume out = vol;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if ((cbm0[n] && !cbm[n]) || (bsm0[n] && !bsm[n])) out[n] = Tissue::CSF;
  }
  return out;
}

// ------------------------------------------------------ ventriculomegaly

double midplane(const LabelVolume& vol) {
  BinaryMask brain(vol.geometry());
  for (std::size_t n = 0; n < vol.size(); ++n) brain[n] = vol[n] != Tissue::Background ? 1 : 0;
  const Box box = foreground_box(brain);
  if (box.empty()) throw Error(ErrorCode::NoTargetStructure, "midplane of an all-background volume");
  const int g = vol.orientation().grid_axis(AnatomicalAxis::LeftRight);
  return 0.5 * double(box.lo[g] + box.hi[g]);
}

std::vector<Vec3> ventricle_centroids(const LabelVolume& vol, Laterality side) {
  const double mid = midplane(vol);
  const int g = vol.orientation().grid_axis(AnatomicalAxis::LeftRight);
  const bool left_is_low = vol.orientation().sign[g] > 0;
  // [0] = left, [1] = right
  std::array<Vec3, 2> sum{};
  std::array<std::size_t, 2> count{0, 0};
  const auto& d = vol.dims();
  const auto& s = vol.spacing();
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (vol(i, j, k) != Tissue::VM) continue;
        const Index3 p{i, j, k};
        const double x = double(p[g]);
        if (x == mid) continue;
        const int h = (x < mid) == left_is_low ? 0 : 1;
        for (int a = 0; a < 3; ++a) sum[h][a] += double(p[a]) * s[a];
        ++count[h];
      }
    }
  }
  std::vector<Vec3> out;
  auto take = [&](int h) {
    if (count[h] == 0) {
      throw Error(ErrorCode::NoTargetStructure,
                  std::string("ventriculomegaly: no VM voxels on the ") + (h == 0 ? "left" : "right"));
    }
    out.push_back({sum[h][0] / double(count[h]), sum[h][1] / double(count[h]), sum[h][2] / double(count[h])});
  };
  if (side != Laterality::Right) take(0);
  if (side != Laterality::Left) take(1);
  return out;
}

DisplacementField ventricle_field(const LabelVolume& vol, double magnitude_mm, double sigma_mm, Laterality side) {
  if (!std::isfinite(magnitude_mm) || magnitude_mm < 0.0 || !(sigma_mm > 0.0) || !std::isfinite(sigma_mm)) {
    throw Error(ErrorCode::InvalidArgument, "ventriculomegaly needs magnitude >= 0 and sigma > 0");
  }
  const auto centroids = ventricle_centroids(vol, side);
  const Geometry& g = vol.geometry();
  DisplacementField total = DisplacementField::zero(g);
  if (magnitude_mm == 0.0) return total;

  const double cutoff = 4.0 * sigma_mm;
  const double eps = 1e-6;
  for (const Vec3& c : centroids) {
    Box roi;
    for (int a = 0; a < 3; ++a) {
      roi.lo[a] = static_cast<std::int64_t>(std::floor((c[a] - cutoff) / g.spacing[a]));
      roi.hi[a] = static_cast<std::int64_t>(std::ceil((c[a] + cutoff) / g.spacing[a]));
    }
    roi = roi.clipped(g.dims);
    if (roi.empty()) continue;
    DisplacementField field(g, roi);
    for (std::int64_t k = roi.lo[2]; k <= roi.hi[2]; ++k) {
      for (std::int64_t j = roi.lo[1]; j <= roi.hi[1]; ++j) {
        for (std::int64_t i = roi.lo[0]; i <= roi.hi[0]; ++i) {
          const Vec3 r{double(i) * g.spacing[0] - c[0], double(j) * g.spacing[1] - c[1],
                       double(k) * g.spacing[2] - c[2]};
          const double dist = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
          if (dist > cutoff) continue;
          const double scale =
              magnitude_mm * std::exp(-dist * dist / (2.0 * sigma_mm * sigma_mm)) / std::max(dist, eps);
          field.ref(i, j, k) = {static_cast<float>(scale * r[0]), static_cast<float>(scale * r[1]),
                                static_cast<float>(scale * r[2])};
        }
      }
    }
    total += field;
  }
  return total;
}

LabelVolume ventriculomegaly(const LabelVolume& vol, double magnitude_mm, double sigma_mm, Laterality side) {
  return warp_labels(vol, ventricle_field(vol, magnitude_mm, sigma_mm, side));
}

// ------------------------------------------------------------ planning

namespace {

constexpr std::array<std::string_view, kKindCount> kKindNames{
    "complete_agenesis",  "partial_agenesis", "cc_thinning",      "cc_thickening",
    "cc_kink",            "cortex_thickening", "cortex_thinning", "cortex_smoothing",
    "posterior_fossa_hypoplasia", "ventriculomegaly",
};

}  // namespace

std::string_view kind_name(Kind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<Kind> kind_from_name(std::string_view name) noexcept {
  for (std::size_t n = 0; n < kKindNames.size(); ++n) {
    if (kKindNames[n] == name) return static_cast<Kind>(n);
  }
  return std::nullopt;
}

std::string_view end_name(End e) noexcept { return e == End::Anterior ? "anterior" : "posterior"; }

std::string_view laterality_name(Laterality l) noexcept {
  switch (l) {
    case Laterality::Left: return "left";
    case Laterality::Right: return "right";
    case Laterality::Bilateral: return "bilateral";
  }
  return "bilateral";
}

Severity::Severity(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::InvalidArgument, "severity must lie in [0, 1]");
}

namespace {

struct NamedRange {
  std::string_view name;
  Range Ranges::*member;
};

constexpr std::array<NamedRange, 11> kRanges{{
    {"partial_fraction", &Ranges::partial_fraction},
    {"thinning_iterations", &Ranges::thinning_iterations},
    {"thickening_radius", &Ranges::thickening_radius},
    {"kink_amplitude_mm", &Ranges::kink_amplitude_mm},
    {"kink_cycles", &Ranges::kink_cycles},
    {"ventriculomegaly_magnitude_mm", &Ranges::ventriculomegaly_magnitude_mm},
    {"ventriculomegaly_sigma_mm", &Ranges::ventriculomegaly_sigma_mm},
    {"cortex_thickening_radius", &Ranges::cortex_thickening_radius},
    {"cortex_thinning_radius", &Ranges::cortex_thinning_radius},
    {"cortex_smoothing_radius", &Ranges::cortex_smoothing_radius},
    {"hypoplasia_iterations", &Ranges::hypoplasia_iterations},
}};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

}  // namespace

void AugmentationConfig::validate() const {
  if (!(p_augment >= 0.0 && p_augment <= 1.0)) invalid("p_augment must lie in [0, 1]");
  if (max_transforms < 1) invalid("max_transforms must be >= 1");
  bool any = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) invalid("weights must be finite and >= 0");
    any = any || w > 0.0;
  }
  if (!any) invalid("at least one weight must be positive");
  for (const auto& r : kRanges) {
    const Range& v = ranges.*r.member;
    if (!std::isfinite(v.min) || !std::isfinite(v.max) || v.min < 0.0 || v.max < v.min) {
      invalid("range " + std::string(r.name) + " must satisfy 0 <= min <= max");
    }
  }
  if (!(ranges.partial_fraction.min > 0.0 && ranges.partial_fraction.max < 1.0)) {
    invalid("partial_fraction must lie inside (0, 1)");
  }
  if (!(ranges.kink_cycles.min > 0.0)) invalid("kink_cycles must be > 0");
  if (!(ranges.ventriculomegaly_sigma_mm.min > 0.0)) invalid("ventriculomegaly_sigma_mm must be > 0");
  for (const Range* r : {&ranges.thinning_iterations, &ranges.hypoplasia_iterations}) {
    if (!is_integral(r->min) || !is_integral(r->max)) invalid("iteration ranges must be whole numbers");
  }
}

AugmentationPlan sample_plan(const AugmentationConfig& config, std::uint64_t seed) {
  config.validate();
  AugmentationPlan plan;
  plan.seed = seed;
  Rng rng(mix64(seed));
  plan.applied = uniform(rng, 0.0, 1.0) < config.p_augment;
  if (!plan.applied) return plan;

  std::vector<int> pool;
  for (int k = 0; k < kKindCount; ++k) {
    if (config.weights[static_cast<std::size_t>(k)] > 0.0) pool.push_back(k);
  }
  const auto count = uniform_int(rng, 1, std::min<std::int64_t>(config.max_transforms, std::ssize(pool)));
  const Ranges& r = config.ranges;
  auto real = [&](const Range& range) { return uniform(rng, range.min, range.max); };
  auto whole = [&](const Range& range) {
    return static_cast<int>(uniform_int(rng, static_cast<std::int64_t>(range.min), static_cast<std::int64_t>(range.max)));
  };

  for (std::int64_t n = 0; n < count; ++n) {
    double total = 0.0;
    for (int k : pool) total += config.weights[static_cast<std::size_t>(k)];
    const double target = uniform(rng, 0.0, total);
    std::size_t pick = pool.size() - 1;
    double acc = 0.0;
    for (std::size_t q = 0; q < pool.size(); ++q) {
      acc += config.weights[static_cast<std::size_t>(pool[q])];
      if (target < acc) {
        pick = q;
        break;
      }
    }
    const auto kind = static_cast<Kind>(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));

    Step step{kind, CompleteAgenesisParams{}};
    switch (kind) {
      case Kind::CompleteAgenesis: break;
      case Kind::PartialAgenesis: {
        const double fraction = real(r.partial_fraction);
        step.params = PartialAgenesisParams{fraction, uniform_int(rng, 0, 1) ? End::Anterior : End::Posterior};
        break;
      }
      case Kind::CcThinning: step.params = ThinningParams{whole(r.thinning_iterations)}; break;
      case Kind::CcThickening: step.params = ThickeningParams{real(r.thickening_radius)}; break;
      case Kind::CcKink: {
        const double amplitude = real(r.kink_amplitude_mm);
        const double cycles = real(r.kink_cycles);
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        step.params = KinkParams{amplitude, cycles, phase};
        break;
      }
      case Kind::CortexThickening: step.params = CortexParams{real(r.cortex_thickening_radius)}; break;
      case Kind::CortexThinning: step.params = CortexParams{real(r.cortex_thinning_radius)}; break;
      case Kind::CortexSmoothing: step.params = CortexParams{real(r.cortex_smoothing_radius)}; break;
      case Kind::PosteriorFossaHypoplasia: step.params = HypoplasiaParams{whole(r.hypoplasia_iterations)}; break;
      case Kind::Ventriculomegaly: {
        const double magnitude = real(r.ventriculomegaly_magnitude_mm);
        const double sigma = real(r.ventriculomegaly_sigma_mm);
        step.params = VentriculomegalyParams{magnitude, sigma, static_cast<Laterality>(uniform_int(rng, 0, 2))};
        break;
      }
    }
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

namespace {

template <typename P>
const P& params_of(const Step& step) {
  const P* p = std::get_if<P>(&step.params);
  if (!p) invalid("parameters do not match transform " + std::string(kind_name(step.kind)));
  return *p;
}

}  // namespace

LabelVolume apply_step(const LabelVolume& vol, const Step& step) {
  switch (step.kind) {
    case Kind::CompleteAgenesis: return complete_agenesis(vol);
    case Kind::PartialAgenesis: {
      const auto& p = params_of<PartialAgenesisParams>(step);
      return partial_agenesis(vol, p.fraction, p.end);
    }
    case Kind::CcThinning: return cc_thinning(vol, params_of<ThinningParams>(step).iterations);
    case Kind::CcThickening: return cc_thickening(vol, params_of<ThickeningParams>(step).radius);
    case Kind::CcKink: {
      const auto& p = params_of<KinkParams>(step);
      return cc_kink(vol, p.amplitude_mm, p.cycles, p.phase);
    }
    case Kind::CortexThickening: return cortex_thickening(vol, params_of<CortexParams>(step).radius);
    case Kind::CortexThinning: return cortex_thinning(vol, params_of<CortexParams>(step).radius);
    case Kind::CortexSmoothing: return cortex_smoothing(vol, params_of<CortexParams>(step).radius);
    case Kind::PosteriorFossaHypoplasia:
      return posterior_fossa_hypoplasia(vol, params_of<HypoplasiaParams>(step).iterations);
    case Kind::Ventriculomegaly: {
      const auto& p = params_of<VentriculomegalyParams>(step);
      return ventriculomegaly(vol, p.magnitude_mm, p.sigma_mm, p.side);
    }
  }
  invalid("unknown transform kind");
}

PlanResult apply_plan(const LabelVolume& vol, const AugmentationPlan& plan) {
  PlanResult result{vol, {}};
  for (std::size_t n = 0; n < plan.steps.size(); ++n) {
    try {
      result.volume = apply_step(result.volume, plan.steps[n]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoTargetStructure) throw;
      result.skipped.push_back("step " + std::to_string(n) + " " + std::string(kind_name(plan.steps[n].kind)) +
                               " skipped: " + e.what());
    }
  }
  return result;
}

// ---------------------------------------------------------------- JSON

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) invalid(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

Range range_from_json(const json& j, std::string_view name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    invalid("range " + std::string(name) + " must be [min, max]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

End end_from_name(const std::string& s) {
  if (s == "anterior") return End::Anterior;
  if (s == "posterior") return End::Posterior;
  invalid("unknown end '" + s + "'");
}

Laterality laterality_from_name(const std::string& s) {
  if (s == "left") return Laterality::Left;
  if (s == "right") return Laterality::Right;
  if (s == "bilateral") return Laterality::Bilateral;
  invalid("unknown laterality '" + s + "'");
}

}  // namespace

AugmentationConfig config_from_json(const json& j) {
  AugmentationConfig config;
  try {
    check_keys(j, {"p_augment", "max_transforms", "weights", "ranges"}, "augmentation config");
    if (j.contains("p_augment")) config.p_augment = j.at("p_augment").get<double>();
    if (j.contains("max_transforms")) config.max_transforms = j.at("max_transforms").get<int>();
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      if (!w.is_object()) invalid("weights must be an object");
      for (const auto& [key, value] : w.items()) {
        const auto kind = kind_from_name(key);
        if (!kind) invalid("unknown transform '" + key + "' in weights");
        config.weights[static_cast<std::size_t>(*kind)] = value.get<double>();
      }
    }
    if (j.contains("ranges")) {
      const json& r = j.at("ranges");
      if (!r.is_object()) invalid("ranges must be an object");
      for (const auto& [key, value] : r.items()) {
        const auto it = std::find_if(kRanges.begin(), kRanges.end(), [&](const auto& nr) { return nr.name == key; });
        if (it == kRanges.end()) invalid("unknown range '" + key + "'");
        config.ranges.*(it->member) = range_from_json(value, key);
      }
    }
  } catch (const json::exception& e) {
    invalid(std::string("augmentation config: ") + e.what());
  }
  config.validate();
  return config;
}

json to_json(const AugmentationConfig& config) {
  json weights = json::object();
  for (int k = 0; k < kKindCount; ++k) {
    weights[std::string(kind_name(static_cast<Kind>(k)))] = config.weights[static_cast<std::size_t>(k)];
  }
  json ranges = json::object();
  for (const auto& r : kRanges) {
    const Range& v = config.ranges.*r.member;
    ranges[std::string(r.name)] = {v.min, v.max};
  }
  return {{"p_augment", config.p_augment}, {"max_transforms", config.max_transforms},
          {"weights", weights}, {"ranges", ranges}};
}

namespace {

json step_to_json(const Step& step) {
  json j = {{"kind", kind_name(step.kind)}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PartialAgenesisParams>) {
          j["fraction"] = p.fraction;
          j["end"] = end_name(p.end);
        } else if constexpr (std::is_same_v<P, ThinningParams> || std::is_same_v<P, HypoplasiaParams>) {
          j["iterations"] = p.iterations;
        } else if constexpr (std::is_same_v<P, ThickeningParams> || std::is_same_v<P, CortexParams>) {
          j["radius"] = p.radius;
        } else if constexpr (std::is_same_v<P, KinkParams>) {
          j["amplitude_mm"] = p.amplitude_mm;
          j["cycles"] = p.cycles;
          j["phase"] = p.phase;
        } else if constexpr (std::is_same_v<P, VentriculomegalyParams>) {
          j["magnitude_mm"] = p.magnitude_mm;
          j["sigma_mm"] = p.sigma_mm;
          j["side"] = laterality_name(p.side);
        }
      },
      step.params);
  return j;
}

Step step_from_json(const json& j) {
  const auto kind = kind_from_name(j.at("kind").get<std::string>());
  if (!kind) invalid("unknown transform '" + j.at("kind").get<std::string>() + "'");
  Step step{*kind, CompleteAgenesisParams{}};
  switch (*kind) {
    case Kind::CompleteAgenesis: break;
    case Kind::PartialAgenesis:
      step.params = PartialAgenesisParams{j.at("fraction").get<double>(), end_from_name(j.at("end").get<std::string>())};
      break;
    case Kind::CcThinning: step.params = ThinningParams{j.at("iterations").get<int>()}; break;
    case Kind::PosteriorFossaHypoplasia: step.params = HypoplasiaParams{j.at("iterations").get<int>()}; break;
    case Kind::CcThickening: step.params = ThickeningParams{j.at("radius").get<double>()}; break;
    case Kind::CortexThickening:
    case Kind::CortexThinning:
    case Kind::CortexSmoothing: step.params = CortexParams{j.at("radius").get<double>()}; break;
    case Kind::CcKink:
      step.params = KinkParams{j.at("amplitude_mm").get<double>(), j.at("cycles").get<double>(),
                               j.at("phase").get<double>()};
      break;
    case Kind::Ventriculomegaly:
      step.params = VentriculomegalyParams{j.at("magnitude_mm").get<double>(), j.at("sigma_mm").get<double>(),
                                           laterality_from_name(j.at("side").get<std::string>())};
      break;
  }
  return step;
}

}  // namespace

json to_json(const AugmentationPlan& plan) {
  json steps = json::array();
  for (const auto& s : plan.steps) steps.push_back(step_to_json(s));
  return {{"seed", plan.seed}, {"applied", plan.applied}, {"steps", steps}};
}

AugmentationPlan plan_from_json(const json& j) {
  AugmentationPlan plan;
  try {
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.applied = j.at("applied").get<bool>();
    for (const auto& s : j.at("steps")) plan.steps.push_back(step_from_json(s));
  } catch (const json::exception& e) {
    invalid(std::string("augmentation plan: ") + e.what());
  }
  return plan;
}

std::string describe(const Step& step) {
  const json j = step_to_json(step);
  std::ostringstream os;
  os << kind_name(step.kind) << '(';
  bool first = true;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (!first) os << ", ";
    first = false;
    os << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
  }
  os << ')';
  return os.str();
}

}  // namespace callosim::augment
