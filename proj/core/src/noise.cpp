#include "callosim/noise.hpp"

#include <algorithm>
#include <cmath>

#include "callosim/random.hpp"

namespace callosim {

LatticeNoise::LatticeNoise(const Geometry& geometry, double scale_mm, std::uint64_t seed) {
  if (!(scale_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise scale must be positive");
  for (int a = 0; a < 3; ++a) {
    step_[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(scale_mm / geometry.spacing[a] - 1e-9)));
    // Nodes at 0, step, 2 step, ... covering the last voxel.
    counts_[a] = (geometry.dims[a] - 1 + step_[a] - 1) / step_[a] + 1;
    if (counts_[a] < 2) counts_[a] = 2;
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  nodes_.resize(static_cast<std::size_t>(counts_[0] * counts_[1] * counts_[2]));
  for (auto& v : nodes_) v = normal(rng);

  double in_grid_max = 0.0;
  for (std::int64_t c = 0; c < counts_[2]; ++c) {
    for (std::int64_t b = 0; b < counts_[1]; ++b) {
      for (std::int64_t a = 0; a < counts_[0]; ++a) {
        if (a * step_[0] < geometry.dims[0] && b * step_[1] < geometry.dims[1] && c * step_[2] < geometry.dims[2]) {
          in_grid_max = std::max(in_grid_max, std::abs(node(a, b, c)));
        }
      }
    }
  }
  if (in_grid_max == 0.0) in_grid_max = 1.0;
  for (auto& v : nodes_) v = std::clamp(v / in_grid_max, -1.0, 1.0);
}

double LatticeNoise::value(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
  const std::int64_t p[3] = {i, j, k};
  std::int64_t base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    base[a] = std::min(p[a] / step_[a], counts_[a] - 2);
    frac[a] = double(p[a] - base[a] * step_[a]) / double(step_[a]);
  }
  double out = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double wc = c ? frac[2] : 1.0 - frac[2];
    for (int b = 0; b < 2; ++b) {
      const double wb = b ? frac[1] : 1.0 - frac[1];
      for (int a = 0; a < 2; ++a) {
        const double wa = a ? frac[0] : 1.0 - frac[0];
        out += wa * wb * wc * node(base[0] + a, base[1] + b, base[2] + c);
      }
    }
  }
  return out;
}

}  // namespace callosim
