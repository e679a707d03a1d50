#include "callosim/topology.hpp"

#include <cstdlib>
#include <numeric>
#include <vector>

#include "callosim/morphology.hpp"

namespace callosim {

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent_[b] = a;
    } else {
      parent_[a] = b;
    }
  }

 private:
  std::vector<std::uint32_t> parent_;
};

std::vector<Index3> backward_neighbours(Connectivity connectivity) {
  const int max_l1 = connectivity == Connectivity::Faces ? 1 : connectivity == Connectivity::Edges ? 2 : 3;
  std::vector<Index3> out;
  for (std::int64_t dz = -1; dz <= 0; ++dz) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const bool before = dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0);
        if (!before) continue;
        if (std::abs(dx) + std::abs(dy) + std::abs(dz) > max_l1) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

// Two-pass raster labelling with union-find on a dense buffer. Final ids
// follow first encounter in x-fastest scan order.
std::uint32_t label_buffer(const std::uint8_t* data, const Index3& d, Connectivity connectivity,
                           std::vector<std::uint32_t>& labels) {
  const auto n = static_cast<std::size_t>(d[0] * d[1] * d[2]);
  labels.assign(n, 0);
  const auto neighbours = backward_neighbours(connectivity);
  std::vector<std::int64_t> delta;
  for (const auto& o : neighbours) delta.push_back(o[0] + d[0] * (o[1] + d[1] * o[2]));

  DisjointSet sets;
  sets.make();  // slot 0 = background
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const auto idx = static_cast<std::size_t>(i + d[0] * (j + d[1] * k));
        if (!data[idx]) continue;
        std::uint32_t current = 0;
        for (std::size_t q = 0; q < neighbours.size(); ++q) {
          const auto& o = neighbours[q];
          const std::int64_t ni = i + o[0], nj = j + o[1], nk = k + o[2];
          if (ni < 0 || nj < 0 || nk < 0 || ni >= d[0] || nj >= d[1]) continue;
          const std::uint32_t other = labels[static_cast<std::size_t>(static_cast<std::int64_t>(idx) + delta[q])];
          if (!other) continue;
          if (!current) {
            current = other;
          } else if (other != current) {
            sets.unite(current, other);
          }
        }
        labels[idx] = current ? current : sets.make();
      }
    }
  }

  std::vector<std::uint32_t> final_id;
  std::uint32_t count = 0;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!labels[idx]) continue;
    const std::uint32_t root = sets.find(labels[idx]);
    if (final_id.size() <= root) final_id.resize(root + 1, 0);
    if (!final_id[root]) final_id[root] = ++count;
    labels[idx] = final_id[root];
  }
  return count;
}

std::vector<std::uint8_t> crop(const BinaryMask& mask, const Box& box, std::int64_t pad, Index3& dims_out) {
  const Box padded = box.expanded({pad, pad, pad});
  dims_out = {padded.extent(0), padded.extent(1), padded.extent(2)};
  std::vector<std::uint8_t> out(static_cast<std::size_t>(dims_out[0] * dims_out[1] * dims_out[2]), 0);
  for (std::int64_t k = box.lo[2]; k <= box.hi[2]; ++k) {
    for (std::int64_t j = box.lo[1]; j <= box.hi[1]; ++j) {
      for (std::int64_t i = box.lo[0]; i <= box.hi[0]; ++i) {
        const auto li = i - padded.lo[0], lj = j - padded.lo[1], lk = k - padded.lo[2];
        out[static_cast<std::size_t>(li + dims_out[0] * (lj + dims_out[1] * lk))] = mask(i, j, k) ? 1 : 0;
      }
    }
  }
  return out;
}

}  // namespace

ComponentLabels connected_components(const BinaryMask& mask, Connectivity connectivity) {
  ComponentLabels result{Volume<std::uint32_t>(mask.geometry()), 0};
  const Box box = foreground_box(mask);
  if (box.empty()) return result;
  Index3 d{};
  const auto local = crop(mask, box, 0, d);
  std::vector<std::uint32_t> labels;
  result.count = label_buffer(local.data(), d, connectivity, labels);
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        result.ids(box.lo[0] + i, box.lo[1] + j, box.lo[2] + k) =
            labels[static_cast<std::size_t>(i + d[0] * (j + d[1] * k))];
      }
    }
  }
  return result;
}

std::uint32_t count_components(const BinaryMask& mask, Connectivity connectivity) {
  const Box box = foreground_box(mask);
  if (box.empty()) return 0;
  Index3 d{};
  const auto local = crop(mask, box, 0, d);
  std::vector<std::uint32_t> labels;
  return label_buffer(local.data(), d, connectivity, labels);
}

std::int64_t euler_characteristic(const BinaryMask& mask) {
  const Box box = foreground_box(mask);
  if (box.empty()) return 0;
  // One voxel of background padding so every incident cell is addressable.
  Index3 d{};
  const auto local = crop(mask, box, 1, d);
  auto fg = [&](std::int64_t i, std::int64_t j, std::int64_t k) -> bool {
    return local[static_cast<std::size_t>(i + d[0] * (j + d[1] * k))] != 0;
  };

  // Padded voxel (i, j, k) occupies [i, i+1] x [j, j+1] x [k, k+1]. The cell at
  // lattice point (i, j, k) and its lower-dimensional companions are present
  // iff an incident voxel is foreground.
  std::int64_t vertices = 0, edges = 0, faces = 0, cubes = 0;
  for (std::int64_t k = 1; k < d[2]; ++k) {
    for (std::int64_t j = 1; j < d[1]; ++j) {
      for (std::int64_t i = 1; i < d[0]; ++i) {
        const bool v000 = fg(i - 1, j - 1, k - 1), v100 = fg(i, j - 1, k - 1);
        const bool v010 = fg(i - 1, j, k - 1), v110 = fg(i, j, k - 1);
        const bool v001 = fg(i - 1, j - 1, k), v101 = fg(i, j - 1, k);
        const bool v011 = fg(i - 1, j, k), v111 = fg(i, j, k);
        if (v000 || v100 || v010 || v110 || v001 || v101 || v011 || v111) ++vertices;
        // Edges from lattice point (i, j, k) in +x, +y, +z.
        if (v101 || v111 || v100 || v110) ++edges;  // +x: voxels (i, j-1..j, k-1..k)
        if (v011 || v111 || v010 || v110) ++edges;  // +y: voxels (i-1..i, j, k-1..k)
        if (v001 || v101 || v011 || v111) ++edges;  // +z: voxels (i-1..i, j-1..j, k)
        // Faces spanning +y+z (normal x), +x+z (normal y), +x+y (normal z).
        if (v011 || v111) ++faces;
        if (v101 || v111) ++faces;
        if (v110 || v111) ++faces;
        if (v111) ++cubes;
      }
    }
  }
  return vertices - edges + faces - cubes;
}

BettiTriple betti_numbers(const BinaryMask& mask) {
  const Box box = foreground_box(mask);
  if (box.empty()) return {0, 0, 0};
  BettiTriple b;
  b.b0 = count_components(mask, Connectivity::Vertices);

  Index3 d{};
  auto local = crop(mask, box, 1, d);
  for (auto& v : local) v = v ? 0 : 1;
  std::vector<std::uint32_t> labels;
  // The padding shell is one 6-connected component joined to everything
  // outside the box, i.e. the unbounded complement.
  const std::uint32_t complement_components = label_buffer(local.data(), d, Connectivity::Faces, labels);
  b.b2 = static_cast<std::int64_t>(complement_components) - 1;
  b.b1 = b.b0 + b.b2 - euler_characteristic(mask);
  if (b.b1 < 0) throw Error(ErrorCode::InconsistentTopology, "derived b1 < 0");
  return b;
}

}  // namespace callosim
