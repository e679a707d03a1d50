#include "callosim/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace callosim {

StructuringElement::StructuringElement(LineElement e) : shape_(e) {
  if (e.length < 1 || e.length % 2 == 0) throw Error(ErrorCode::InvalidArgument, "line length must be odd and >= 1");
}

StructuringElement::StructuringElement(SphereElement e) : shape_(e) {
  if (!(e.radius >= 0.0) || !std::isfinite(e.radius)) {
    throw Error(ErrorCode::InvalidArgument, "sphere radius must be finite and >= 0");
  }
}

StructuringElement::StructuringElement(BoxElement e) : shape_(e) {
  for (auto h : e.half_extents) {
    if (h < 0) throw Error(ErrorCode::InvalidArgument, "box half extents must be >= 0");
  }
}

StructuringElement StructuringElement::reflect() const {
  StructuringElement out = *this;
  out.reflected_ = !reflected_;
  return out;
}

std::vector<Index3> StructuringElement::offsets(const Orientation& orientation) const {
  std::vector<Index3> out;
  if (const auto* line = std::get_if<LineElement>(&shape_)) {
    const int g = orientation.grid_axis(line->axis);
    const int h = (line->length - 1) / 2;
    for (int t = -h; t <= h; ++t) {
      Index3 o{0, 0, 0};
      o[g] = t;
      out.push_back(o);
    }
  } else if (const auto* sphere = std::get_if<SphereElement>(&shape_)) {
    const double r2 = sphere->radius * sphere->radius;
    const auto r = static_cast<std::int64_t>(std::floor(sphere->radius));
    for (std::int64_t dz = -r; dz <= r; ++dz) {
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        for (std::int64_t dx = -r; dx <= r; ++dx) {
          if (static_cast<double>(dx * dx + dy * dy + dz * dz) <= r2) out.push_back({dx, dy, dz});
        }
      }
    }
  } else {
    const auto& h = std::get<BoxElement>(shape_).half_extents;
    for (std::int64_t dz = -h[2]; dz <= h[2]; ++dz) {
      for (std::int64_t dy = -h[1]; dy <= h[1]; ++dy) {
        for (std::int64_t dx = -h[0]; dx <= h[0]; ++dx) out.push_back({dx, dy, dz});
      }
    }
  }
  if (reflected_) {
    for (auto& o : out) o = {-o[0], -o[1], -o[2]};
  }
  return out;
}

namespace {

// Offsets grouped by (dy, dz) with a contiguous dx interval; every supported
// element is convex along x.
struct RowSpan {
  std::int64_t dy, dz, lo, hi;
};

std::vector<RowSpan> row_spans(const std::vector<Index3>& offsets) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::int64_t>> rows;
  for (const auto& o : offsets) rows[{o[1], o[2]}].push_back(o[0]);
  std::vector<RowSpan> spans;
  for (auto& [key, xs] : rows) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.back() - xs.front() + 1 != static_cast<std::int64_t>(xs.size())) {
      throw Error(ErrorCode::InvalidArgument, "structuring element is not x-convex");
    }
    spans.push_back({key.first, key.second, xs.front(), xs.back()});
  }
  return spans;
}

Index3 reach(const std::vector<Index3>& offsets) {
  Index3 r{0, 0, 0};
  for (const auto& o : offsets) {
    for (int a = 0; a < 3; ++a) r[a] = std::max<std::int64_t>(r[a], std::abs(o[a]));
  }
  return r;
}

// Per-row prefix counts over the x-range of `box`.
class RowPrefix {
 public:
  RowPrefix(const BinaryMask& mask, const Box& box)
      : box_(box), nx_(box.extent(0)), ny_(box.extent(1)), prefix_(static_cast<std::size_t>((nx_ + 1) * ny_ * box.extent(2))) {
    for (std::int64_t k = box.lo[2]; k <= box.hi[2]; ++k) {
      for (std::int64_t j = box.lo[1]; j <= box.hi[1]; ++j) {
        std::uint32_t* p = row(j, k);
        p[0] = 0;
        for (std::int64_t x = 0; x < nx_; ++x) p[x + 1] = p[x] + (mask(box.lo[0] + x, j, k) ? 1u : 0u);
      }
    }
  }

  bool has_row(std::int64_t j, std::int64_t k) const noexcept {
    return j >= box_.lo[1] && j <= box_.hi[1] && k >= box_.lo[2] && k <= box_.hi[2];
  }
  /// Foreground count over absolute x in [a, b], both already clipped to the box.
  std::uint32_t count(std::int64_t j, std::int64_t k, std::int64_t a, std::int64_t b) const noexcept {
    const std::uint32_t* p = row(j, k);
    return p[b - box_.lo[0] + 1] - p[a - box_.lo[0]];
  }

 private:
  std::uint32_t* row(std::int64_t j, std::int64_t k) noexcept {
    return prefix_.data() + static_cast<std::size_t>(((j - box_.lo[1]) + ny_ * (k - box_.lo[2])) * (nx_ + 1));
  }
  const std::uint32_t* row(std::int64_t j, std::int64_t k) const noexcept {
    return prefix_.data() + static_cast<std::size_t>(((j - box_.lo[1]) + ny_ * (k - box_.lo[2])) * (nx_ + 1));
  }

  Box box_;
  std::int64_t nx_, ny_;
  std::vector<std::uint32_t> prefix_;
};

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  BinaryMask out(mask.geometry());
  const Box box = foreground_box(mask);
  if (box.empty()) return out;
  const auto offsets = se.offsets(mask.orientation());
  if (offsets.empty()) {
    // Vacuous condition: every voxel qualifies.
    std::fill(out.buffer().begin(), out.buffer().end(), std::uint8_t{1});
    return out;
  }
  const auto spans = row_spans(offsets);
  const RowPrefix prefix(mask, box);
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(box.extent(0)));

  for (std::int64_t k = box.lo[2]; k <= box.hi[2]; ++k) {
    for (std::int64_t j = box.lo[1]; j <= box.hi[1]; ++j) {
      std::fill(alive.begin(), alive.end(), std::uint8_t{1});
      bool any = true;
      for (const auto& s : spans) {
        const std::int64_t sj = j + s.dy, sk = k + s.dz;
        if (!prefix.has_row(sj, sk)) {
          any = false;
          break;
        }
        const auto need = static_cast<std::uint32_t>(s.hi - s.lo + 1);
        any = false;
        for (std::int64_t x = box.lo[0]; x <= box.hi[0]; ++x) {
          auto& a = alive[static_cast<std::size_t>(x - box.lo[0])];
          if (!a) continue;
          const std::int64_t lo = x + s.lo, hi = x + s.hi;
          if (lo < box.lo[0] || hi > box.hi[0] || prefix.count(sj, sk, lo, hi) != need) {
            a = 0;
          } else {
            any = true;
          }
        }
        if (!any) break;
      }
      if (!any) continue;
      for (std::int64_t x = box.lo[0]; x <= box.hi[0]; ++x) out(x, j, k) = alive[static_cast<std::size_t>(x - box.lo[0])];
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  BinaryMask out(mask.geometry());
  const Box box = foreground_box(mask);
  if (box.empty()) return out;
  const auto offsets = se.offsets(mask.orientation());
  if (offsets.empty()) return out;
  const auto spans = row_spans(offsets);
  const RowPrefix prefix(mask, box);
  const Box region = box.expanded(reach(offsets)).clipped(mask.dims());

  for (std::int64_t k = region.lo[2]; k <= region.hi[2]; ++k) {
    for (std::int64_t j = region.lo[1]; j <= region.hi[1]; ++j) {
      for (const auto& s : spans) {
        const std::int64_t sj = j - s.dy, sk = k - s.dz;
        if (!prefix.has_row(sj, sk)) continue;
        for (std::int64_t x = region.lo[0]; x <= region.hi[0]; ++x) {
          auto& v = out(x, j, k);
          if (v) continue;
          const std::int64_t lo = std::max(x - s.hi, box.lo[0]);
          const std::int64_t hi = std::min(x - s.lo, box.hi[0]);
          if (lo <= hi && prefix.count(sj, sk, lo, hi) > 0) v = 1;
        }
      }
    }
  }
  return out;
}

namespace {
void require_same(const BinaryMask& a, const BinaryMask& b) {
  if (a.geometry() != b.geometry()) throw Error(ErrorCode::MetadataMismatch, "mask geometries differ");
}
}  // namespace

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.geometry());
  for (std::size_t n = 0; n < mask.size(); ++n) out[n] = mask[n] ? 0 : 1;
  return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  BinaryMask out(a.geometry());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = (a[n] || b[n]) ? 1 : 0;
  return out;
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  BinaryMask out(a.geometry());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = (a[n] && b[n]) ? 1 : 0;
  return out;
}

bool is_subset(const BinaryMask& a, const BinaryMask& b) {
  require_same(a, b);
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (a[n] && !b[n]) return false;
  }
  return true;
}

Box foreground_box(const BinaryMask& mask) noexcept {
  Box box{{mask.dims()[0], mask.dims()[1], mask.dims()[2]}, {-1, -1, -1}};
  const auto& d = mask.dims();
  bool found = false;
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      const std::uint8_t* row = mask.voxels().data() + mask.geometry().index(0, j, k);
      std::int64_t first = -1, last = -1;
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (row[i]) {
          if (first < 0) first = i;
          last = i;
        }
      }
      if (first < 0) continue;
      found = true;
      box.lo = {std::min(box.lo[0], first), std::min(box.lo[1], j), std::min(box.lo[2], k)};
      box.hi = {std::max(box.hi[0], last), std::max(box.hi[1], j), std::max(box.hi[2], k)};
    }
  }
  return found ? box : Box{};
}

Box bounding_box(const BinaryMask& mask) {
  const Box box = foreground_box(mask);
  if (box.empty()) throw Error(ErrorCode::EmptyMask, "bounding box of an empty mask");
  return box;
}

}  // namespace callosim
