#pragma once

#include <cstdint>
#include <vector>

#include "callosim/volume.hpp"

namespace callosim {

/// Low-frequency noise: Gaussian values on a coarse lattice with node spacing
/// ceil(scale_mm / spacing) voxels per axis, trilinearly interpolated. Values
/// are normalised so the largest in-grid node magnitude is 1 and every node
/// lies in [-1, 1]; hence |value| <= 1 with equality attained.
class LatticeNoise {
 public:
  LatticeNoise(const Geometry& geometry, double scale_mm, std::uint64_t seed);

  double value(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept;
  const Index3& step() const noexcept { return step_; }

 private:
  double node(std::int64_t a, std::int64_t b, std::int64_t c) const noexcept {
    return nodes_[static_cast<std::size_t>(a + counts_[0] * (b + counts_[1] * c))];
  }

  Index3 step_{1, 1, 1};
  Index3 counts_{1, 1, 1};
  std::vector<double> nodes_;
};

}  // namespace callosim
