#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "callosim/volume.hpp"

namespace callosim::harmonize {

/// Source code (0..255) -> tissue label. In strict mode a code without an
/// explicit entry is an error; otherwise it maps to Background.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(std::string name, bool strict);

  static LabelMap identity();
  /// Draw-EM tissue codes onto the 8-class scheme; source code 10 carries CC.
  static LabelMap drawem_to_feta();
  static std::optional<LabelMap> builtin(const std::string& name);

  void set(std::uint8_t source, Tissue target);
  std::optional<Tissue> lookup(std::uint8_t source) const noexcept;
  Tissue operator()(std::uint8_t source) const;  // throws UnmappedCode in strict mode

  const std::string& name() const noexcept { return name_; }
  bool strict() const noexcept { return strict_; }

  /// Map applying `first` then this one (on tissue codes).
  LabelMap after(const LabelMap& first) const;

 private:
  std::string name_ = "unnamed";
  bool strict_ = true;
  std::array<std::int16_t, 256> table_{[] {
    std::array<std::int16_t, 256> t{};
    t.fill(-1);
    return t;
  }()};
};

LabelVolume remap(const CodeVolume& vol, const LabelMap& map);
LabelVolume remap(const LabelVolume& vol, const LabelMap& map);

/// CC voxels become WM.
LabelVolume merge_cc_into_wm(const LabelVolume& vol);

LabelMap map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabelMap& map);

}  // namespace callosim::harmonize
