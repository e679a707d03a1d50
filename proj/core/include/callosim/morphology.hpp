#pragma once

#include <variant>
#include <vector>

#include "callosim/volume.hpp"

namespace callosim {

struct LineElement {
  AnatomicalAxis axis = AnatomicalAxis::InferiorSuperior;
  int length = 1;  // odd, >= 1
};

struct SphereElement {
  double radius = 1.0;  // voxels, offsets with |o| <= radius
};

struct BoxElement {
  Index3 half_extents{1, 1, 1};  // grid axes, voxels
};

/// Structuring element. Offsets are resolved against a grid orientation so
/// Line can be addressed by anatomical axis.
class StructuringElement {
 public:
  using Variant = std::variant<LineElement, SphereElement, BoxElement>;

  StructuringElement(LineElement e);
  StructuringElement(SphereElement e);
  StructuringElement(BoxElement e);

  static StructuringElement line(AnatomicalAxis axis, int length) { return LineElement{axis, length}; }
  static StructuringElement sphere(double radius) { return SphereElement{radius}; }
  static StructuringElement box(Index3 half_extents) { return BoxElement{half_extents}; }

  const Variant& shape() const noexcept { return shape_; }
  bool reflected() const noexcept { return reflected_; }
  /// Point reflection o -> -o.
  StructuringElement reflect() const;

  /// Grid offsets of the element for the given orientation.
  std::vector<Index3> offsets(const Orientation& orientation) const;

 private:
  Variant shape_;
  bool reflected_ = false;
};

/// out(p) = 1 iff p + o lies in the mask for every offset o. Reads outside the grid are background.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
/// Minkowski sum: out(p) = 1 iff p - o lies in the mask for some offset o. Output is clipped to the grid.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);

BinaryMask complement(const BinaryMask& mask);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
/// True iff every foreground voxel of a is foreground in b.
bool is_subset(const BinaryMask& a, const BinaryMask& b);

/// Minimal box containing all foreground voxels; throws EmptyMask.
Box bounding_box(const BinaryMask& mask);
/// As bounding_box but returns an empty Box instead of throwing.
Box foreground_box(const BinaryMask& mask) noexcept;

}  // namespace callosim
