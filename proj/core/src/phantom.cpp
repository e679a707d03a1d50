#include "callosim/phantom.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "callosim/noise.hpp"
#include "callosim/random.hpp"

namespace callosim::phantom {

namespace {

using nlohmann::json;

[[noreturn]] void infeasible(const std::string& what) { throw Error(ErrorCode::InfeasibleSpec, what); }

double ellipsoid_level(const Vec3& p, const Vec3& center, const Vec3& semi, double scale = 1.0) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double t = (p[a] - center[a]) / (semi[a] * scale);
    s += t * t;
  }
  return s;
}

bool inside(const Vec3& p, const Ellipsoid& e, double scale = 1.0) {
  return ellipsoid_level(p, e.center, e.semi_axes, scale) <= 1.0;
}

Vec3 shrink(const Vec3& v, double by) { return {v[0] - by, v[1] - by, v[2] - by}; }

bool in_arch(const Vec3& p, const Arch& a) {
  const double u = (p[1] - a.center_y) / (0.5 * a.span);
  if (std::abs(u) > 1.0 || std::abs(p[0]) > a.half_width) return false;
  const double centre_z = a.base_z + a.height * (1.0 - u * u);
  return std::abs(p[2] - centre_z) <= 0.5 * a.thickness;
}

Ellipsoid left_of(const PhantomSpec& s) {
  return {{-s.ventricle_offset[0], s.ventricle_offset[1], s.ventricle_offset[2]}, s.ventricle_semi_axes};
}
Ellipsoid right_of(const PhantomSpec& s) { return {s.ventricle_offset, s.ventricle_semi_axes}; }

std::vector<Vec3> extreme_points(const Ellipsoid& e) {
  std::vector<Vec3> pts;
  for (int a = 0; a < 3; ++a) {
    for (double sgn : {-1.0, 1.0}) {
      Vec3 p = e.center;
      p[a] += sgn * e.semi_axes[a];
      pts.push_back(p);
    }
  }
  return pts;
}

std::vector<Vec3> arch_points(const Arch& a) {
  std::vector<Vec3> pts;
  for (int n = 0; n <= 16; ++n) {
    const double u = -1.0 + n / 8.0;
    const double y = a.center_y + u * 0.5 * a.span;
    const double z = a.base_z + a.height * (1.0 - u * u);
    for (double dx : {-a.half_width, a.half_width}) {
      for (double dz : {-0.5 * a.thickness, 0.5 * a.thickness}) pts.push_back({dx, y, z + dz});
    }
  }
  return pts;
}

void check_positive(const Vec3& v, const std::string& what) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) infeasible(what + " must be positive");
  }
}

}  // namespace

PhantomSpec PhantomSpec::small(std::uint64_t seed) {
  PhantomSpec s;
  s.dims = {96, 96, 96};
  s.spacing = {1.0, 1.0, 1.0};
  s.seed = seed;
  return s;
}

void PhantomSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 3) infeasible("dims must be at least 3 per axis");
  }
  check_positive(spacing, "spacing");
  check_positive(head_semi_axes, "head semi-axes");
  check_positive(ventricle_semi_axes, "ventricle semi-axes");
  check_positive(third_ventricle.semi_axes, "third ventricle semi-axes");
  check_positive(deep_grey.semi_axes, "deep grey semi-axes");
  check_positive(cerebellum.semi_axes, "cerebellum semi-axes");
  check_positive(brainstem.semi_axes, "brainstem semi-axes");
  if (!(boundary_jitter >= 0.0 && boundary_jitter < 0.5)) infeasible("boundary_jitter must lie in [0, 0.5)");
  if (!(noise_scale_mm > 0.0)) infeasible("noise_scale_mm must be positive");
  const auto& cc = corpus_callosum;
  if (!(cc.span > 0.0 && cc.thickness > 0.0 && cc.half_width > 0.0 && cc.height >= 0.0)) {
    infeasible("corpus callosum arch needs positive span, thickness and half width");
  }

  const double voxel = std::max({spacing[0], spacing[1], spacing[2]});
  if (csf_thickness < voxel || cortical_thickness < voxel) {
    infeasible("CSF and cortical shells must be at least one voxel thick");
  }
  const Vec3 wm_axes = shrink(head_semi_axes, csf_thickness + cortical_thickness);
  for (double v : wm_axes) {
    if (v < 2.0 * voxel) infeasible("head too small for its CSF and cortical shells");
  }
  for (int a = 0; a < 3; ++a) {
    const double half_extent = 0.5 * double(dims[a] - 1) * spacing[a];
    if (head_semi_axes[a] * (1.0 + boundary_jitter) + spacing[a] > half_extent) {
      infeasible("head does not fit the grid with one voxel clearance");
    }
  }

  // Deep structures must sit inside the smallest white-matter boundary with one voxel to spare.
  const Ellipsoid wm_inner{{0, 0, 0}, shrink(wm_axes, voxel)};
  const double min_scale = 1.0 - boundary_jitter;
  auto require_inside = [&](const std::vector<Vec3>& pts, const std::string& what) {
    for (const auto& p : pts) {
      if (!inside(p, wm_inner, min_scale)) infeasible(what + " does not fit inside the white matter");
    }
  };
  require_inside(extreme_points(left_of(*this)), "left ventricle");
  require_inside(extreme_points(right_of(*this)), "right ventricle");
  require_inside(extreme_points(third_ventricle), "third ventricle");
  require_inside(extreme_points(deep_grey), "deep grey matter");
  require_inside(arch_points(corpus_callosum), "corpus callosum");
  // Cerebellum and brainstem are clipped to the white matter; only their centres must lie inside.
  require_inside({cerebellum.center}, "cerebellum");
  require_inside({brainstem.center}, "brainstem");
  if (ventricle_offset[0] <= ventricle_semi_axes[0]) infeasible("lateral ventricles overlap the midline");
}

LabelVolume generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const Geometry geom{spec.dims, spec.spacing, Orientation::ras()};
  LabelVolume vol(geom, Tissue::Background);
  const LatticeNoise noise(geom, spec.noise_scale_mm, derive_seed(spec.seed, 0));

  const Ellipsoid csf_outer{{0, 0, 0}, spec.head_semi_axes};
  const Ellipsoid gm_outer{{0, 0, 0}, shrink(spec.head_semi_axes, spec.csf_thickness)};
  const Ellipsoid wm_outer{{0, 0, 0}, shrink(spec.head_semi_axes, spec.csf_thickness + spec.cortical_thickness)};
  const Ellipsoid left = left_of(spec), right = right_of(spec);

  const auto& d = geom.dims;
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const Vec3 p{(double(i) - 0.5 * double(d[0] - 1)) * spec.spacing[0],
                     (double(j) - 0.5 * double(d[1] - 1)) * spec.spacing[1],
                     (double(k) - 0.5 * double(d[2] - 1)) * spec.spacing[2]};
        // Shells share one perturbation factor so they stay nested.
        const double f = 1.0 + spec.boundary_jitter * noise.value(i, j, k);
        if (!inside(p, csf_outer, f)) continue;
        Tissue t = Tissue::CSF;
        if (inside(p, gm_outer, f)) t = Tissue::GM;
        if (inside(p, wm_outer, f)) {
          t = Tissue::WM;
          if (inside(p, spec.deep_grey)) t = Tissue::SGM;
          if (inside(p, spec.cerebellum)) t = Tissue::CBM;
          if (inside(p, spec.brainstem)) t = Tissue::BSM;
          if (inside(p, left) || inside(p, right) || inside(p, spec.third_ventricle)) t = Tissue::VM;
          if (in_arch(p, spec.corpus_callosum)) t = Tissue::CC;
        }
        vol(i, j, k) = t;
      }
    }
  }
  return vol;
}

// ---------------------------------------------------------------- JSON

namespace {

Vec3 vec3_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) infeasible(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Ellipsoid ellipsoid_from(const json& j, const Ellipsoid& fallback, std::string_view what) {
  Ellipsoid e = fallback;
  for (const auto& [key, value] : j.items()) {
    if (key == "center") {
      e.center = vec3_from(value, std::string(what) + ".center");
    } else if (key == "semi_axes") {
      e.semi_axes = vec3_from(value, std::string(what) + ".semi_axes");
    } else {
      infeasible("unknown key '" + key + "' in " + std::string(what));
    }
  }
  return e;
}

json ellipsoid_to(const Ellipsoid& e) { return {{"center", e.center}, {"semi_axes", e.semi_axes}}; }

}  // namespace

PhantomSpec spec_from_json(const json& j) {
  PhantomSpec s;
  try {
    if (!j.is_object()) infeasible("phantom spec must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "dims") {
        const Vec3 v = vec3_from(value, key);
        for (int a = 0; a < 3; ++a) {
          if (v[a] != std::floor(v[a])) infeasible("dims must be integers");
          s.dims[a] = static_cast<std::int64_t>(v[a]);
        }
      } else if (key == "spacing") {
        s.spacing = vec3_from(value, key);
      } else if (key == "head_semi_axes") {
        s.head_semi_axes = vec3_from(value, key);
      } else if (key == "csf_thickness") {
        s.csf_thickness = value.get<double>();
      } else if (key == "cortical_thickness") {
        s.cortical_thickness = value.get<double>();
      } else if (key == "ventricle_semi_axes") {
        s.ventricle_semi_axes = vec3_from(value, key);
      } else if (key == "ventricle_offset") {
        s.ventricle_offset = vec3_from(value, key);
      } else if (key == "third_ventricle") {
        s.third_ventricle = ellipsoid_from(value, s.third_ventricle, key);
      } else if (key == "deep_grey") {
        s.deep_grey = ellipsoid_from(value, s.deep_grey, key);
      } else if (key == "cerebellum") {
        s.cerebellum = ellipsoid_from(value, s.cerebellum, key);
      } else if (key == "brainstem") {
        s.brainstem = ellipsoid_from(value, s.brainstem, key);
      } else if (key == "corpus_callosum") {
        auto& a = s.corpus_callosum;
        for (const auto& [field, v] : value.items()) {
          if (field == "center_y") {
            a.center_y = v.get<double>();
          } else if (field == "base_z") {
            a.base_z = v.get<double>();
          } else if (field == "span") {
            a.span = v.get<double>();
          } else if (field == "height") {
            a.height = v.get<double>();
          } else if (field == "thickness") {
            a.thickness = v.get<double>();
          } else if (field == "half_width") {
            a.half_width = v.get<double>();
          } else {
            infeasible("unknown key '" + field + "' in corpus_callosum");
          }
        }
      } else if (key == "boundary_jitter") {
        s.boundary_jitter = value.get<double>();
      } else if (key == "noise_scale_mm") {
        s.noise_scale_mm = value.get<double>();
      } else if (key == "seed") {
        s.seed = value.get<std::uint64_t>();
      } else {
        infeasible("unknown key '" + key + "' in phantom spec");
      }
    }
  } catch (const json::exception& e) {
    infeasible(std::string("phantom spec: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const PhantomSpec& s) {
  const auto& a = s.corpus_callosum;
  return {{"dims", s.dims},
          {"spacing", s.spacing},
          {"head_semi_axes", s.head_semi_axes},
          {"csf_thickness", s.csf_thickness},
          {"cortical_thickness", s.cortical_thickness},
          {"ventricle_semi_axes", s.ventricle_semi_axes},
          {"ventricle_offset", s.ventricle_offset},
          {"third_ventricle", ellipsoid_to(s.third_ventricle)},
          {"deep_grey", ellipsoid_to(s.deep_grey)},
          {"corpus_callosum",
           {{"center_y", a.center_y},
            {"base_z", a.base_z},
            {"span", a.span},
            {"height", a.height},
            {"thickness", a.thickness},
            {"half_width", a.half_width}}},
          {"cerebellum", ellipsoid_to(s.cerebellum)},
          {"brainstem", ellipsoid_to(s.brainstem)},
          {"boundary_jitter", s.boundary_jitter},
          {"noise_scale_mm", s.noise_scale_mm},
          {"seed", s.seed}};
}

}  // namespace callosim::phantom
