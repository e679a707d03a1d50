#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "callosim/volume.hpp"

namespace callosim::io {

enum class Datatype : std::int16_t { UInt8 = 2, Float32 = 16 };

struct VolumeHeader {
  Geometry geometry{};
  Datatype datatype = Datatype::UInt8;
  std::string description;
  std::string intent_name;
};

using AnyVolume = std::variant<LabelVolume, IntensityVolume>;

/// Header only. Throws MalformedHeader / UnsupportedDatatype / ObliqueAffine / IoError.
VolumeHeader read_header(const std::filesystem::path& path);

/// uint8 data become a LabelVolume (LabelOutOfRange above code 8), float32 an IntensityVolume.
AnyVolume read_volume(const std::filesystem::path& path);
LabelVolume read_labels(const std::filesystem::path& path);
IntensityVolume read_intensities(const std::filesystem::path& path);
/// uint8 codes without label validation.
CodeVolume read_codes(const std::filesystem::path& path);

/// NIfTI-1 single file, vox_offset 352. `compress` gzips the whole file.
void write_volume(const LabelVolume& vol, const std::filesystem::path& path, bool compress);
void write_volume(const IntensityVolume& vol, const std::filesystem::path& path, bool compress);
void write_volume(const CodeVolume& vol, const std::filesystem::path& path, bool compress);

/// Compression chosen from a ".gz" extension.
bool wants_gzip(const std::filesystem::path& path);

/// Raw test format: "CMV1", dims as three little-endian u32, then uint8 payload.
void write_raw(const CodeVolume& vol, const std::filesystem::path& path);
CodeVolume read_raw(const std::filesystem::path& path);

}  // namespace callosim::io
