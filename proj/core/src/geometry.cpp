#include "callosim/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "callosim/error.hpp"

namespace callosim {

bool Orientation::valid() const noexcept {
  std::array<bool, 3> seen{};
  for (int g = 0; g < 3; ++g) {
    const auto a = static_cast<int>(axis[g]);
    if (a < 0 || a > 2 || seen[a]) return false;
    seen[a] = true;
    if (sign[g] != 1 && sign[g] != -1) return false;
  }
  return true;
}

int Orientation::grid_axis(AnatomicalAxis a) const noexcept {
  for (int g = 0; g < 3; ++g) {
    if (axis[g] == a) return g;
  }
  return -1;
}

int Orientation::grid_sign(AnatomicalAxis a) const noexcept {
  const int g = grid_axis(a);
  return g < 0 ? 0 : sign[g];
}

std::string Orientation::code() const {
  static constexpr char kPositive[] = {'R', 'A', 'S'};
  static constexpr char kNegative[] = {'L', 'P', 'I'};
  std::string out(3, '?');
  for (int g = 0; g < 3; ++g) {
    const auto a = static_cast<int>(axis[g]);
    out[g] = sign[g] > 0 ? kPositive[a] : kNegative[a];
  }
  return out;
}

Box Box::expanded(const Index3& margin) const noexcept {
  Box b = *this;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] -= margin[a];
    b.hi[a] += margin[a];
  }
  return b;
}

Box Box::clipped(const Index3& dims) const noexcept {
  Box b = *this;
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = std::max<std::int64_t>(b.lo[a], 0);
    b.hi[a] = std::min<std::int64_t>(b.hi[a], dims[a] - 1);
  }
  return b;
}

void Geometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw Error(ErrorCode::InvalidArgument, "dims must be positive");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
    }
  }
  if (!orientation.valid()) throw Error(ErrorCode::InvalidArgument, "orientation is not a signed permutation");
}

}  // namespace callosim
