#pragma once

#include <vector>

#include "callosim/volume.hpp"

namespace callosim {

struct SurfaceDistances {
  std::vector<double> a_to_b;  // mm, one per foreground voxel of a in scan order
  std::vector<double> b_to_a;
};

/// Voxel-centre Euclidean distances, spacing-weighted. Throws EmptyMask.
SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b);

/// Squared spacing-weighted distance (mm^2) from every voxel in `roi` to the
/// nearest foreground voxel of `target`, exact separable transform. `roi`
/// must contain every foreground voxel of `target`. Result is laid out over roi.
std::vector<double> squared_distance_transform(const BinaryMask& target, const Box& roi);

}  // namespace callosim
