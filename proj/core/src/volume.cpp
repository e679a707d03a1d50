#include "callosim/volume.hpp"

#include <algorithm>

namespace callosim {

namespace {
constexpr std::string_view kNames[kTissueCount] = {"Background", "CSF", "GM", "WM", "VM",
                                                   "CBM",        "SGM", "BSM", "CC"};
}

std::string_view tissue_name(Tissue t) noexcept {
  const auto c = code(t);
  return c < kTissueCount ? kNames[c] : std::string_view{"?"};
}

std::optional<Tissue> tissue_from_name(std::string_view name) noexcept {
  for (int c = 0; c < kTissueCount; ++c) {
    if (kNames[c] == name) return static_cast<Tissue>(c);
  }
  return std::nullopt;
}

Census census(const LabelVolume& vol) {
  Census counts{};
  for (const Tissue t : vol.voxels()) ++counts[code(t)];
  return counts;
}

BinaryMask extract_mask(const LabelVolume& vol, Tissue label) {
  BinaryMask mask(vol.geometry());
  const auto src = vol.voxels();
  auto dst = mask.voxels();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = src[n] == label ? 1 : 0;
  return mask;
}

std::size_t popcount(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.voxels().begin(), mask.voxels().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

LabelVolume to_labels(const CodeVolume& codes) {
  std::vector<Tissue> out(codes.size());
  const auto src = codes.voxels();
  for (std::size_t n = 0; n < src.size(); ++n) {
    if (src[n] > kMaxTissueCode) {
      throw Error(ErrorCode::LabelOutOfRange, "voxel code " + std::to_string(src[n]) + " exceeds 8");
    }
    out[n] = static_cast<Tissue>(src[n]);
  }
  return {codes.geometry(), std::move(out)};
}

CodeVolume to_codes(const LabelVolume& vol) {
  std::vector<std::uint8_t> out(vol.size());
  const auto src = vol.voxels();
  for (std::size_t n = 0; n < src.size(); ++n) out[n] = code(src[n]);
  return {vol.geometry(), std::move(out)};
}

}  // namespace callosim
