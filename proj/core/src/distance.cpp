#include "callosim/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "callosim/morphology.hpp"

namespace callosim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) along one line
// with physical sample spacing w. Infinite samples contribute no parabola.
void transform_line(std::vector<double>& f, std::vector<double>& out, std::vector<std::int64_t>& v,
                    std::vector<double>& z, double w) {
  const auto n = static_cast<std::int64_t>(f.size());
  const double w2 = w * w;
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double fq = f[q] + w2 * double(q) * double(q);
    while (k >= 0) {
      const std::int64_t p = v[k];
      const double s = (fq - (f[p] + w2 * double(p) * double(p))) / (2.0 * w2 * double(q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    if (k == 0) {
      v[0] = q;
      z[0] = -kInf;
    } else {
      const std::int64_t p = v[k - 1];
      v[k] = q;
      z[k] = (fq - (f[p] + w2 * double(p) * double(p))) / (2.0 * w2 * double(q - p));
    }
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (j < k && z[j + 1] < double(q)) ++j;
    const double d = w * double(q - v[j]);
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const BinaryMask& target, const Box& roi) {
  const Index3 d{roi.extent(0), roi.extent(1), roi.extent(2)};
  std::vector<double> grid(static_cast<std::size_t>(d[0] * d[1] * d[2]), kInf);
  auto at = [&](std::int64_t i, std::int64_t j, std::int64_t k) -> double& {
    return grid[static_cast<std::size_t>(i + d[0] * (j + d[1] * k))];
  };
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (target(roi.lo[0] + i, roi.lo[1] + j, roi.lo[2] + k)) at(i, j, k) = 0.0;
      }
    }
  }

  const auto& s = target.spacing();
  const std::int64_t longest = std::max({d[0], d[1], d[2]});
  std::vector<double> f, out;
  std::vector<std::int64_t> v(static_cast<std::size_t>(longest));
  std::vector<double> z(static_cast<std::size_t>(longest) + 1);

  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    f.resize(static_cast<std::size_t>(d[axis]));
    out.resize(f.size());
    for (std::int64_t p2 = 0; p2 < d[a2]; ++p2) {
      for (std::int64_t p1 = 0; p1 < d[a1]; ++p1) {
        Index3 idx{};
        idx[a1] = p1;
        idx[a2] = p2;
        bool any = false;
        for (std::int64_t q = 0; q < d[axis]; ++q) {
          idx[axis] = q;
          f[q] = at(idx[0], idx[1], idx[2]);
          any = any || f[q] != kInf;
        }
        if (!any) continue;
        transform_line(f, out, v, z, s[axis]);
        for (std::int64_t q = 0; q < d[axis]; ++q) {
          idx[axis] = q;
          at(idx[0], idx[1], idx[2]) = out[q];
        }
      }
    }
  }
  return grid;
}

SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b) {
  if (a.geometry() != b.geometry()) throw Error(ErrorCode::MetadataMismatch, "mask geometries differ");
  const Box box_a = foreground_box(a), box_b = foreground_box(b);
  if (box_a.empty() || box_b.empty()) throw Error(ErrorCode::EmptyMask, "surface distances need two non-empty masks");
  Box roi;
  for (int ax = 0; ax < 3; ++ax) {
    roi.lo[ax] = std::min(box_a.lo[ax], box_b.lo[ax]);
    roi.hi[ax] = std::max(box_a.hi[ax], box_b.hi[ax]);
  }
  const Index3 d{roi.extent(0), roi.extent(1), roi.extent(2)};

  auto directed = [&](const BinaryMask& from, const BinaryMask& to) {
    const auto dist2 = squared_distance_transform(to, roi);
    std::vector<double> out;
    for (std::int64_t k = 0; k < d[2]; ++k) {
      for (std::int64_t j = 0; j < d[1]; ++j) {
        for (std::int64_t i = 0; i < d[0]; ++i) {
          if (from(roi.lo[0] + i, roi.lo[1] + j, roi.lo[2] + k)) {
            out.push_back(std::sqrt(dist2[static_cast<std::size_t>(i + d[0] * (j + d[1] * k))]));
          }
        }
      }
    }
    return out;
  };
  return {directed(a, b), directed(b, a)};
}

}  // namespace callosim
