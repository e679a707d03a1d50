#include "callosim/warp.hpp"

#include <algorithm>
#include <cmath>

namespace callosim {

DisplacementField::DisplacementField(Geometry geometry, Box roi)
    : geometry_(std::move(geometry)), roi_(roi.empty() ? Box{} : roi.clipped(geometry_.dims)) {
  if (!roi_.empty()) {
    vectors_.assign(static_cast<std::size_t>(roi_.extent(0) * roi_.extent(1) * roi_.extent(2)), Vec3f{0, 0, 0});
  }
}

std::size_t DisplacementField::local_index(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
  return static_cast<std::size_t>((i - roi_.lo[0]) +
                                  roi_.extent(0) * ((j - roi_.lo[1]) + roi_.extent(1) * (k - roi_.lo[2])));
}

Vec3f DisplacementField::at(std::int64_t i, std::int64_t j, std::int64_t k) const noexcept {
  if (roi_.empty() || !roi_.contains(i, j, k)) return {0, 0, 0};
  return vectors_[local_index(i, j, k)];
}

Vec3f& DisplacementField::ref(std::int64_t i, std::int64_t j, std::int64_t k) noexcept {
  return vectors_[local_index(i, j, k)];
}

double DisplacementField::max_magnitude() const noexcept {
  double m = 0.0;
  for (const auto& v : vectors_) {
    m = std::max(m, std::sqrt(double(v[0]) * v[0] + double(v[1]) * v[1] + double(v[2]) * v[2]));
  }
  return m;
}

bool DisplacementField::finite() const noexcept {
  return std::all_of(vectors_.begin(), vectors_.end(), [](const Vec3f& v) {
    return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
  });
}

DisplacementField& DisplacementField::operator+=(const DisplacementField& other) {
  if (other.geometry_ != geometry_) throw Error(ErrorCode::MetadataMismatch, "field geometries differ");
  if (other.roi_.empty()) return *this;
  Box merged = other.roi_;
  if (!roi_.empty()) {
    for (int a = 0; a < 3; ++a) {
      merged.lo[a] = std::min(merged.lo[a], roi_.lo[a]);
      merged.hi[a] = std::max(merged.hi[a], roi_.hi[a]);
    }
  }
  DisplacementField sum(geometry_, merged);
  for (std::int64_t k = merged.lo[2]; k <= merged.hi[2]; ++k) {
    for (std::int64_t j = merged.lo[1]; j <= merged.hi[1]; ++j) {
      for (std::int64_t i = merged.lo[0]; i <= merged.hi[0]; ++i) {
        const Vec3f a = at(i, j, k), b = other.at(i, j, k);
        sum.ref(i, j, k) = {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
      }
    }
  }
  *this = std::move(sum);
  return *this;
}

LabelVolume warp_labels(const LabelVolume& vol, const DisplacementField& field) {
  if (field.geometry() != vol.geometry()) throw Error(ErrorCode::MetadataMismatch, "field does not match volume");
  LabelVolume out = vol;
  const Box& roi = field.roi();
  if (roi.empty()) return out;
  const auto& s = vol.spacing();
  for (std::int64_t k = roi.lo[2]; k <= roi.hi[2]; ++k) {
    for (std::int64_t j = roi.lo[1]; j <= roi.hi[1]; ++j) {
      for (std::int64_t i = roi.lo[0]; i <= roi.hi[0]; ++i) {
        const Vec3f u = field.at(i, j, k);
        const auto si = std::lround(double(i) - double(u[0]) / s[0]);
        const auto sj = std::lround(double(j) - double(u[1]) / s[1]);
        const auto sk = std::lround(double(k) - double(u[2]) / s[2]);
        out(i, j, k) = vol.geometry().inside(si, sj, sk) ? vol(si, sj, sk) : Tissue::Background;
      }
    }
  }
  return out;
}

}  // namespace callosim
