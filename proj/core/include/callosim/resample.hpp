#pragma once

#include "callosim/volume.hpp"

namespace callosim {

/// Nearest-neighbour resample to `target_spacing`, then centre pad (Background)
/// or centre crop to `target_dims`.
LabelVolume conform(const LabelVolume& vol, const Vec3& target_spacing, const Index3& target_dims);

/// Same for raw codes; padding value 0.
CodeVolume conform(const CodeVolume& vol, const Vec3& target_spacing, const Index3& target_dims);

}  // namespace callosim
