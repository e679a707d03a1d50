#pragma once

#include <array>
#include <vector>

#include "callosim/volume.hpp"

namespace callosim {

using Vec3f = std::array<float, 3>;

/// Backward displacement field in mm along grid axes: output at x samples
/// the input at x - u(x). Vectors are stored only over `roi`; the field is
/// zero everywhere else.
class DisplacementField {
 public:
  DisplacementField() = default;
  DisplacementField(Geometry geometry, Box roi);

  static DisplacementField zero(const Geometry& geometry) { return {geometry, Box{}}; }

  const Geometry& geometry() const noexcept { return geometry_; }
  const Box& roi() const noexcept { return roi_; }

  Vec3f at(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept;
  /// Requires (i, j, k) inside roi.
  Vec3f& ref(std::int64_t i, std::int64_t j, std::int64_t k) noexcept;

  /// Largest vector norm over the field.
  double max_magnitude() const noexcept;
  bool finite() const noexcept;

  /// Adds another field defined on the same geometry; roi becomes the union box.
  DisplacementField& operator+=(const DisplacementField& other);

 private:
  std::size_t local_index(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept;

  Geometry geometry_{};
  Box roi_{};
  std::vector<Vec3f> vectors_{};
};

/// Nearest-neighbour backward warp; out-of-grid samples become Background.
LabelVolume warp_labels(const LabelVolume& vol, const DisplacementField& field);

}  // namespace callosim
