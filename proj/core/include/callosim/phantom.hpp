#pragma once

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "callosim/volume.hpp"

namespace callosim::phantom {

/// Structure positions are in mm relative to the grid centre, on anatomical
/// axes (x = left-right, y = posterior-anterior, z = inferior-superior).
struct Ellipsoid {
  Vec3 center{0, 0, 0};
  Vec3 semi_axes{1, 1, 1};
};

struct Arch {
  double center_y = 2.0;     // PA midpoint of the span
  double base_z = 12.0;      // centreline height at both ends
  double span = 36.0;        // PA extent
  double height = 6.0;       // rise of the centreline at mid-span
  double thickness = 3.0;    // inferior-superior
  double half_width = 5.0;   // left-right
};

struct PhantomSpec {
  Index3 dims{256, 256, 256};
  Vec3 spacing{0.5, 0.5, 0.5};
  Vec3 head_semi_axes{36.0, 42.0, 32.0};
  double csf_thickness = 2.0;
  double cortical_thickness = 2.5;
  Vec3 ventricle_semi_axes{4.0, 14.0, 5.0};
  Vec3 ventricle_offset{10.0, 4.0, 6.0};  // right ventricle centre; left mirrored in x
  Ellipsoid third_ventricle{{0.0, 2.0, 2.0}, {11.0, 3.0, 2.5}};
  Ellipsoid deep_grey{{0.0, 2.0, -4.0}, {14.0, 10.0, 7.0}};
  Arch corpus_callosum{};
  Ellipsoid cerebellum{{0.0, -26.0, -14.0}, {16.0, 9.0, 8.0}};
  Ellipsoid brainstem{{0.0, -16.0, -20.0}, {6.0, 7.0, 9.0}};
  double boundary_jitter = 0.03;  // relative semi-axis perturbation of the head shells
  double noise_scale_mm = 16.0;
  std::uint64_t seed = 0;

  /// 96^3 at 1 mm: same anatomy on a coarser grid, for fast tests.
  static PhantomSpec small(std::uint64_t seed = 0);

  /// Throws InfeasibleSpec.
  void validate() const;
};

/// Constructs the 8-class phantom. Deterministic in the PhantomSpec, seed included.
LabelVolume generate_phantom(const PhantomSpec& spec);

PhantomSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhantomSpec& spec);

}  // namespace callosim::phantom
