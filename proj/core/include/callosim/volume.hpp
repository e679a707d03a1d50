#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "callosim/error.hpp"
#include "callosim/geometry.hpp"

namespace callosim {

/// Tissue codes. The numeric values are the on-disk encoding.
enum class Tissue : std::uint8_t {
  Background = 0,
  CSF = 1,
  GM = 2,
  WM = 3,
  VM = 4,
  CBM = 5,
  SGM = 6,
  BSM = 7,
  CC = 8,
};

inline constexpr int kTissueCount = 9;
inline constexpr std::uint8_t kMaxTissueCode = 8;

std::string_view tissue_name(Tissue t) noexcept;
std::optional<Tissue> tissue_from_name(std::string_view name) noexcept;
constexpr std::uint8_t code(Tissue t) noexcept { return static_cast<std::uint8_t>(t); }

/// Dense 3D grid, x-fastest.
template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;
  explicit Volume(Geometry geometry, T fill = T{})
      : geometry_(std::move(geometry)), voxels_(geometry_.size(), fill) {}
  Volume(Geometry geometry, std::vector<T> voxels) : geometry_(std::move(geometry)), voxels_(std::move(voxels)) {
    if (voxels_.size() != geometry_.size()) {
      throw Error(ErrorCode::InvalidArgument, "voxel buffer size does not match dims");
    }
  }

  const Geometry& geometry() const noexcept { return geometry_; }
  const Index3& dims() const noexcept { return geometry_.dims; }
  const Vec3& spacing() const noexcept { return geometry_.spacing; }
  const Orientation& orientation() const noexcept { return geometry_.orientation; }
  std::size_t size() const noexcept { return voxels_.size(); }

  T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) noexcept { return voxels_[geometry_.index(i, j, k)]; }
  const T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
    return voxels_[geometry_.index(i, j, k)];
  }
  T& operator[](std::size_t n) noexcept { return voxels_[n]; }
  const T& operator[](std::size_t n) const noexcept { return voxels_[n]; }

  std::span<T> voxels() noexcept { return voxels_; }
  std::span<const T> voxels() const noexcept { return voxels_; }
  std::vector<T>& buffer() noexcept { return voxels_; }
  const std::vector<T>& buffer() const noexcept { return voxels_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Geometry geometry_{};
  std::vector<T> voxels_{};
};

using LabelVolume = Volume<Tissue>;
using IntensityVolume = Volume<float>;
/// Foreground = 1, background = 0.
using BinaryMask = Volume<std::uint8_t>;
/// Unvalidated 8-bit codes as stored on disk (e.g. a foreign annotation protocol).
using CodeVolume = Volume<std::uint8_t>;

using Census = std::array<std::size_t, kTissueCount>;

Census census(const LabelVolume& vol);
BinaryMask extract_mask(const LabelVolume& vol, Tissue label);
std::size_t popcount(const BinaryMask& mask);
/// Throws LabelOutOfRange on codes > 8.
LabelVolume to_labels(const CodeVolume& codes);
CodeVolume to_codes(const LabelVolume& vol);

}  // namespace callosim
