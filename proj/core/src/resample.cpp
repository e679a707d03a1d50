#include "callosim/resample.hpp"

#include <algorithm>
#include <cmath>

namespace callosim {

namespace {

std::int64_t floor_div2(std::int64_t v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

template <typename T>
Volume<T> conform_impl(const Volume<T>& vol, const Vec3& target_spacing, const Index3& target_dims, T pad) {
  Geometry out_geom{target_dims, target_spacing, vol.orientation()};
  out_geom.validate();
  const auto& n = vol.dims();
  const auto& s = vol.spacing();

  // Per-axis source index for every target index, or -1 for padding.
  std::array<std::vector<std::int64_t>, 3> source;
  for (int a = 0; a < 3; ++a) {
    const double ratio = target_spacing[a] / s[a];
    const auto resampled = std::max<std::int64_t>(1, std::llround(double(n[a]) * s[a] / target_spacing[a]));
    const std::int64_t offset = floor_div2(target_dims[a] - resampled);
    source[a].resize(static_cast<std::size_t>(target_dims[a]));
    for (std::int64_t t = 0; t < target_dims[a]; ++t) {
      const std::int64_t r = t - offset;
      if (r < 0 || r >= resampled) {
        source[a][t] = -1;
      } else {
        source[a][t] = std::min<std::int64_t>(n[a] - 1, static_cast<std::int64_t>(std::floor((double(r) + 0.5) * ratio)));
      }
    }
  }

  Volume<T> out(out_geom, pad);
  for (std::int64_t k = 0; k < target_dims[2]; ++k) {
    const auto sk = source[2][k];
    if (sk < 0) continue;
    for (std::int64_t j = 0; j < target_dims[1]; ++j) {
      const auto sj = source[1][j];
      if (sj < 0) continue;
      for (std::int64_t i = 0; i < target_dims[0]; ++i) {
        const auto si = source[0][i];
        if (si >= 0) out(i, j, k) = vol(si, sj, sk);
      }
    }
  }
  return out;
}

}  // namespace

LabelVolume conform(const LabelVolume& vol, const Vec3& target_spacing, const Index3& target_dims) {
  return conform_impl(vol, target_spacing, target_dims, Tissue::Background);
}

CodeVolume conform(const CodeVolume& vol, const Vec3& target_spacing, const Index3& target_dims) {
  return conform_impl(vol, target_spacing, target_dims, std::uint8_t{0});
}

}  // namespace callosim
