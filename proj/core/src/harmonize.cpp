#include "callosim/harmonize.hpp"

#include <nlohmann/json.hpp>

namespace callosim::harmonize {

using nlohmann::json;

LabelMap::LabelMap(std::string name, bool strict) : name_(std::move(name)), strict_(strict) {}

LabelMap LabelMap::identity() {
  LabelMap m("identity", true);
  for (std::uint8_t c = 0; c <= kMaxTissueCode; ++c) m.set(c, static_cast<Tissue>(c));
  return m;
}

LabelMap LabelMap::drawem_to_feta() {
  LabelMap m("drawem-to-feta", true);
  m.set(0, Tissue::Background);
  m.set(1, Tissue::CSF);
  m.set(2, Tissue::GM);
  m.set(3, Tissue::WM);
  m.set(4, Tissue::Background);
  m.set(5, Tissue::VM);
  m.set(6, Tissue::CBM);
  m.set(7, Tissue::SGM);
  m.set(8, Tissue::BSM);
  m.set(9, Tissue::WM);
  m.set(10, Tissue::CC);
  return m;
}

std::optional<LabelMap> LabelMap::builtin(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "drawem-to-feta") return drawem_to_feta();
  return std::nullopt;
}

void LabelMap::set(std::uint8_t source, Tissue target) { table_[source] = code(target); }

std::optional<Tissue> LabelMap::lookup(std::uint8_t source) const noexcept {
  const auto t = table_[source];
  if (t < 0) return std::nullopt;
  return static_cast<Tissue>(t);
}

Tissue LabelMap::operator()(std::uint8_t source) const {
  if (const auto t = lookup(source)) return *t;
  if (strict_) {
    throw Error(ErrorCode::UnmappedCode, "code " + std::to_string(source) + " has no entry in map '" + name_ + "'");
  }
  return Tissue::Background;
}

LabelMap LabelMap::after(const LabelMap& first) const {
  LabelMap out(first.name_ + "+" + name_, first.strict_ || strict_);
  for (int s = 0; s < 256; ++s) {
    const auto mid = first.lookup(static_cast<std::uint8_t>(s));
    if (!mid) continue;
    if (const auto t = lookup(code(*mid))) out.set(static_cast<std::uint8_t>(s), *t);
  }
  return out;
}

LabelVolume remap(const CodeVolume& vol, const LabelMap& map) {
  std::array<Tissue, 256> resolved{};
  std::array<bool, 256> seen{};
  for (std::uint8_t v : vol.buffer()) seen[v] = true;
  for (int s = 0; s < 256; ++s) {
    if (seen[static_cast<std::size_t>(s)]) resolved[static_cast<std::size_t>(s)] = map(static_cast<std::uint8_t>(s));
  }
  LabelVolume out(vol.geometry());
  for (std::size_t n = 0; n < vol.size(); ++n) out[n] = resolved[vol[n]];
  return out;
}

LabelVolume remap(const LabelVolume& vol, const LabelMap& map) { return remap(to_codes(vol), map); }

LabelVolume merge_cc_into_wm(const LabelVolume& vol) {
  LabelVolume out = vol;
  for (auto& v : out.buffer()) {
    if (v == Tissue::CC) v = Tissue::WM;
  }
  return out;
}

LabelMap map_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "label map must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key != "name" && key != "strict" && key != "map") {
        throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "' in label map");
      }
    }
    LabelMap m(j.value("name", std::string("custom")), j.value("strict", true));
    for (const auto& [src, tgt] : j.at("map").items()) {
      std::size_t used = 0;
      int s = -1;
      try {
        s = std::stoi(src, &used);
      } catch (const std::exception&) {
      }
      if (used != src.size() || s < 0 || s > 255) {
        throw Error(ErrorCode::InvalidConfig, "label map source '" + src + "' is not a code in 0..255");
      }
      const int t = tgt.get<int>();
      if (t < 0 || t > kMaxTissueCode) {
        throw Error(ErrorCode::InvalidConfig, "label map target " + std::to_string(t) + " is not a tissue code");
      }
      m.set(static_cast<std::uint8_t>(s), static_cast<Tissue>(t));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("label map: ") + e.what());
  }
}

json to_json(const LabelMap& map) {
  json entries = json::object();
  for (int s = 0; s < 256; ++s) {
    if (const auto t = map.lookup(static_cast<std::uint8_t>(s))) entries[std::to_string(s)] = code(*t);
  }
  return {{"name", map.name()}, {"strict", map.strict()}, {"map", entries}};
}

}  // namespace callosim::harmonize
