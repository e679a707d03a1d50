#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace callosim {

using Index3 = std::array<std::int64_t, 3>;
using Vec3 = std::array<double, 3>;

/// Anatomical axes. Positive direction is toward Right, Anterior, Superior
/// (RAS), matching the NIfTI world convention.
enum class AnatomicalAxis : std::uint8_t { LeftRight = 0, PosteriorAnterior = 1, InferiorSuperior = 2 };

/// Grid axis -> anatomical axis mapping with per-axis sign. sign = +1 means
/// increasing grid index moves toward R/A/S.
struct Orientation {
  std::array<AnatomicalAxis, 3> axis{AnatomicalAxis::LeftRight, AnatomicalAxis::PosteriorAnterior,
                                     AnatomicalAxis::InferiorSuperior};
  std::array<std::int8_t, 3> sign{1, 1, 1};

  static Orientation ras() { return {}; }

  bool valid() const noexcept;
  /// Grid axis that carries the given anatomical axis.
  int grid_axis(AnatomicalAxis a) const noexcept;
  /// Sign of the grid axis carrying the given anatomical axis.
  int grid_sign(AnatomicalAxis a) const noexcept;
  /// Three-letter code naming the direction of increasing index, e.g. "RAS", "LPI".
  std::string code() const;

  friend bool operator==(const Orientation&, const Orientation&) = default;
};

struct Box {
  Index3 lo{0, 0, 0};
  Index3 hi{-1, -1, -1};  // inclusive

  bool empty() const noexcept { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }
  std::int64_t extent(int axis) const noexcept { return hi[axis] - lo[axis] + 1; }
  bool contains(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return i >= lo[0] && i <= hi[0] && j >= lo[1] && j <= hi[1] && k >= lo[2] && k <= hi[2];
  }
  Box expanded(const Index3& margin) const noexcept;
  Box clipped(const Index3& dims) const noexcept;

  friend bool operator==(const Box&, const Box&) = default;
};

struct Geometry {
  Index3 dims{0, 0, 0};
  Vec3 spacing{1.0, 1.0, 1.0};
  Orientation orientation{};

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k));
  }
  bool inside(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  Box full_box() const noexcept { return {{0, 0, 0}, {dims[0] - 1, dims[1] - 1, dims[2] - 1}}; }
  /// Throws InvalidArgument if dims or spacing are not positive or orientation is not a signed permutation.
  void validate() const;

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

}  // namespace callosim
