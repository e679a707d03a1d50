#pragma once

#include <cstdint>

#include "callosim/volume.hpp"

namespace callosim {

enum class Connectivity : int { Faces = 6, Edges = 18, Vertices = 26 };

struct ComponentLabels {
  Volume<std::uint32_t> ids;  // 0 = background, 1..count in first-encountered scan order
  std::uint32_t count = 0;
};

ComponentLabels connected_components(const BinaryMask& mask, Connectivity connectivity);
/// Component count only; scans the foreground bounding box.
std::uint32_t count_components(const BinaryMask& mask, Connectivity connectivity);

/// V - E + F - C of the closed cubical complex whose 3-cells are the foreground voxels.
std::int64_t euler_characteristic(const BinaryMask& mask);

struct BettiTriple {
  std::int64_t b0 = 0;
  std::int64_t b1 = 0;
  std::int64_t b2 = 0;

  std::int64_t euler() const noexcept { return b0 - b1 + b2; }
  friend bool operator==(const BettiTriple&, const BettiTriple&) = default;
};

/// b0 from 26-connected foreground, b2 from 6-connected complement components
/// not reaching the grid boundary, b1 = b0 + b2 - chi.
BettiTriple betti_numbers(const BinaryMask& mask);

}  // namespace callosim
