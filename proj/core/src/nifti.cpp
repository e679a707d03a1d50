#include "callosim/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace callosim::io {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;
constexpr double kObliqueTolerance = 1e-3;

constexpr std::uint32_t byteswap32(std::uint32_t v) noexcept {
  return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}

// Shortest decimal form of a stored float, so 0.8f reads back as 0.8.
double widen(float v) {
  std::array<char, 32> buf;
  const auto end = std::to_chars(buf.data(), buf.data() + buf.size(), v).ptr;
  double out = v;
  std::from_chars(buf.data(), end, out);
  return out;
}

using Mat3 = std::array<std::array<double, 3>, 3>;  // [row][col]

// ------------------------------------------------------------ byte access

class HeaderReader {
 public:
  HeaderReader(const unsigned char* data, bool swap) : data_(data), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), data_ + offset, sizeof(T));
    if (swap_) std::reverse(bytes.begin(), bytes.end());
    T v;
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
  }
  std::string text(std::size_t offset, std::size_t length) const {
    const auto* begin = reinterpret_cast<const char*>(data_ + offset);
    return {begin, strnlen(begin, length)};
  }

 private:
  const unsigned char* data_;
  bool swap_;
};

class HeaderWriter {
 public:
  HeaderWriter() { bytes_.fill(0); }

  template <typename T>
  void put(std::size_t offset, T v) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    std::memcpy(bytes_.data() + offset, b.data(), sizeof(T));
  }
  void text(std::size_t offset, std::size_t length, const std::string& s) {
    std::memcpy(bytes_.data() + offset, s.data(), std::min(length - 1, s.size()));
  }
  void raw(std::size_t offset, const char* data, std::size_t n) { std::memcpy(bytes_.data() + offset, data, n); }
  const std::array<unsigned char, kVoxOffset>& bytes() const { return bytes_; }

 private:
  std::array<unsigned char, kVoxOffset> bytes_;
};

// ------------------------------------------------------------ orientation

Mat3 quaternion_to_matrix(double b, double c, double d) {
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    const double norm = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= norm;
    c *= norm;
    d *= norm;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  return {{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
           {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
           {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}}};
}

// Rotation part of an orthonormal matrix as (b, c, d, qfac).
std::array<double, 4> matrix_to_quaternion(Mat3 r) {
  const double det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
                     r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
                     r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
  double qfac = 1.0;
  if (det < 0) {
    qfac = -1.0;
    for (int row = 0; row < 3; ++row) r[row][2] = -r[row][2];
  }
  double a = r[0][0] + r[1][1] + r[2][2] + 1.0, b, c, d;
  if (a > 0.5) {
    a = 0.5 * std::sqrt(a);
    b = 0.25 * (r[2][1] - r[1][2]) / a;
    c = 0.25 * (r[0][2] - r[2][0]) / a;
    d = 0.25 * (r[1][0] - r[0][1]) / a;
  } else {
    const double xd = 1.0 + r[0][0] - (r[1][1] + r[2][2]);
    const double yd = 1.0 + r[1][1] - (r[0][0] + r[2][2]);
    const double zd = 1.0 + r[2][2] - (r[0][0] + r[1][1]);
    if (xd > 1.0) {
      b = 0.5 * std::sqrt(xd);
      c = 0.25 * (r[0][1] + r[1][0]) / b;
      d = 0.25 * (r[0][2] + r[2][0]) / b;
      a = 0.25 * (r[2][1] - r[1][2]) / b;
    } else if (yd > 1.0) {
      c = 0.5 * std::sqrt(yd);
      b = 0.25 * (r[0][1] + r[1][0]) / c;
      d = 0.25 * (r[1][2] + r[2][1]) / c;
      a = 0.25 * (r[0][2] - r[2][0]) / c;
    } else {
      d = 0.5 * std::sqrt(zd);
      b = 0.25 * (r[0][2] + r[2][0]) / d;
      c = 0.25 * (r[1][2] + r[2][1]) / d;
      a = 0.25 * (r[1][0] - r[0][1]) / d;
    }
    if (a < 0.0) {
      b = -b;
      c = -c;
      d = -d;
    }
  }
  return {b, c, d, qfac};
}

// Columns of `m` are grid axes in RAS world coordinates.
Orientation orientation_from_matrix(const Mat3& m) {
  Orientation o;
  std::array<bool, 3> used{};
  for (int col = 0; col < 3; ++col) {
    double norm = 0.0;
    int best = 0;
    for (int row = 0; row < 3; ++row) {
      norm += m[row][col] * m[row][col];
      if (std::abs(m[row][col]) > std::abs(m[best][col])) best = row;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) throw Error(ErrorCode::MalformedHeader, "degenerate affine column");
    for (int row = 0; row < 3; ++row) {
      if (row != best && std::abs(m[row][col]) > kObliqueTolerance * norm) {
        throw Error(ErrorCode::ObliqueAffine, "affine is not axis aligned");
      }
    }
    if (used[best]) throw Error(ErrorCode::ObliqueAffine, "affine columns share an axis");
    used[best] = true;
    o.axis[col] = static_cast<AnatomicalAxis>(best);
    o.sign[col] = m[best][col] > 0 ? 1 : -1;
  }
  return o;
}

Mat3 matrix_from_geometry(const Geometry& g) {
  Mat3 m{};
  for (int col = 0; col < 3; ++col) {
    m[static_cast<int>(g.orientation.axis[col])][col] = g.orientation.sign[col] * g.spacing[col];
  }
  return m;
}

// ------------------------------------------------------------ file access

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> data;
  std::array<unsigned char, 1 << 16> chunk;
  for (;;) {
    const int n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      gzclose(f);
      throw Error(ErrorCode::IoError, "read failed for " + path.string());
    }
    if (n == 0) break;
    data.insert(data.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(f);
  return data;
}

void emit(const std::filesystem::path& path, bool compress, const unsigned char* header, std::size_t header_size,
          const unsigned char* payload, std::size_t payload_size) {
  if (compress) {
    gzFile f = gzopen(path.string().c_str(), "wb6");
    if (!f) throw Error(ErrorCode::IoError, "cannot create " + path.string());
    bool ok = gzwrite(f, header, static_cast<unsigned>(header_size)) == static_cast<int>(header_size);
    std::size_t done = 0;
    while (ok && done < payload_size) {
      const auto n = static_cast<unsigned>(std::min<std::size_t>(payload_size - done, 1u << 30));
      ok = gzwrite(f, payload + done, n) == static_cast<int>(n);
      done += n;
    }
    ok = (gzclose(f) == Z_OK) && ok;
    if (!ok) throw Error(ErrorCode::IoError, "write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(header), static_cast<std::streamsize>(header_size));
  out.write(reinterpret_cast<const char*>(payload), static_cast<std::streamsize>(payload_size));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

struct Decoded {
  VolumeHeader header;
  std::size_t offset = kVoxOffset;
  bool swap = false;
  float slope = 1.0f;
  float inter = 0.0f;
};

Decoded decode_header(const std::vector<unsigned char>& data) {
  if (data.size() < kHeaderSize) throw Error(ErrorCode::MalformedHeader, "file shorter than 348 bytes");
  std::int32_t size;
  std::memcpy(&size, data.data(), 4);
  bool swap = false;
  if (size != 348) {
    swap = byteswap32(static_cast<std::uint32_t>(size)) == 348u;
    if (!swap) throw Error(ErrorCode::MalformedHeader, "sizeof_hdr is not 348");
  }
  const HeaderReader h(data.data(), swap);
  if (std::memcmp(data.data() + 344, "n+1\0", 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "magic is not n+1 (single-file NIfTI-1)");
  }

  Decoded out;
  out.swap = swap;
  const auto ndim = h.get<std::int16_t>(40);
  if (ndim < 1 || ndim > 7) throw Error(ErrorCode::MalformedHeader, "dim[0] out of range");
  Geometry g;
  for (int a = 0; a < 3; ++a) {
    const std::int16_t n = a < ndim ? h.get<std::int16_t>(42 + 2 * a) : 1;
    if (n <= 0) throw Error(ErrorCode::MalformedHeader, "non-positive dimension");
    g.dims[a] = n;
  }
  for (int a = 3; a < ndim; ++a) {
    if (h.get<std::int16_t>(42 + 2 * a) > 1) throw Error(ErrorCode::MalformedHeader, "only 3D volumes are supported");
  }
  const auto datatype = h.get<std::int16_t>(70);
  const auto bitpix = h.get<std::int16_t>(72);
  if (datatype == static_cast<std::int16_t>(Datatype::UInt8) && bitpix == 8) {
    out.header.datatype = Datatype::UInt8;
  } else if (datatype == static_cast<std::int16_t>(Datatype::Float32) && bitpix == 32) {
    out.header.datatype = Datatype::Float32;
  } else {
    throw Error(ErrorCode::UnsupportedDatatype, "datatype " + std::to_string(datatype) + " is not uint8/float32");
  }
  const float qfac_raw = h.get<float>(76);
  for (int a = 0; a < 3; ++a) {
    const float p = std::abs(h.get<float>(80 + 4 * a));
    if (!(p > 0.0f) || !std::isfinite(p)) throw Error(ErrorCode::MalformedHeader, "pixdim must be positive");
    g.spacing[a] = widen(p);
  }
  const float vox_offset = h.get<float>(108);
  if (!(vox_offset >= 352.0f) || !std::isfinite(vox_offset)) throw Error(ErrorCode::MalformedHeader, "vox_offset < 352");
  out.offset = static_cast<std::size_t>(vox_offset);
  out.slope = h.get<float>(112);
  out.inter = h.get<float>(116);

  const auto qform_code = h.get<std::int16_t>(252);
  const auto sform_code = h.get<std::int16_t>(254);
  Mat3 m{};
  if (sform_code > 0) {
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) m[row][col] = h.get<float>(280 + 16 * row + 4 * col);
    }
  } else if (qform_code > 0) {
    const Mat3 r = quaternion_to_matrix(h.get<float>(256), h.get<float>(260), h.get<float>(264));
    const double qfac = qfac_raw < 0 ? -1.0 : 1.0;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) m[row][col] = r[row][col] * g.spacing[col] * (col == 2 ? qfac : 1.0);
    }
  } else {
    for (int a = 0; a < 3; ++a) m[a][a] = g.spacing[a];
  }
  g.orientation = orientation_from_matrix(m);
  out.header.geometry = g;
  out.header.description = h.text(148, 80);
  out.header.intent_name = h.text(328, 16);
  return out;
}

template <typename T>
std::vector<T> decode_payload(const std::vector<unsigned char>& data, const Decoded& d) {
  const std::size_t n = d.header.geometry.size();
  if (data.size() < d.offset + n * sizeof(T)) throw Error(ErrorCode::MalformedHeader, "truncated voxel data");
  std::vector<T> out(n);
  std::memcpy(out.data(), data.data() + d.offset, n * sizeof(T));
  if constexpr (sizeof(T) > 1) {
    if (d.swap) {
      for (auto& v : out) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        v = std::bit_cast<T>(byteswap32(bits));
      }
    }
  }
  return out;
}

HeaderWriter encode_header(const Geometry& g, Datatype datatype) {
  g.validate();
  for (auto n : g.dims) {
    if (n > 32767) throw Error(ErrorCode::InvalidArgument, "dimension exceeds NIfTI-1 limit");
  }
  HeaderWriter w;
  w.put<std::int32_t>(0, 348);
  w.put<char>(38, 'r');
  w.put<std::int16_t>(40, 3);
  for (int a = 0; a < 3; ++a) w.put<std::int16_t>(42 + 2 * a, static_cast<std::int16_t>(g.dims[a]));
  for (int a = 3; a < 7; ++a) w.put<std::int16_t>(42 + 2 * a, 1);
  w.put<std::int16_t>(70, static_cast<std::int16_t>(datatype));
  w.put<std::int16_t>(72, datatype == Datatype::UInt8 ? 8 : 32);

  const Mat3 m = matrix_from_geometry(g);
  Mat3 rotation{};
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) rotation[row][col] = m[row][col] / g.spacing[col];
  }
  const auto q = matrix_to_quaternion(rotation);
  w.put<float>(76, static_cast<float>(q[3]));
  for (int a = 0; a < 3; ++a) w.put<float>(80 + 4 * a, static_cast<float>(g.spacing[a]));
  w.put<float>(92, 1.0f);
  w.put<float>(108, static_cast<float>(kVoxOffset));
  w.put<float>(112, 1.0f);
  w.put<float>(116, 0.0f);
  w.put<char>(123, 2);  // mm
  w.text(148, 80, "callosim");
  w.put<std::int16_t>(252, 1);
  w.put<std::int16_t>(254, 1);
  w.put<float>(256, static_cast<float>(q[0]));
  w.put<float>(260, static_cast<float>(q[1]));
  w.put<float>(264, static_cast<float>(q[2]));
  // Grid centre at the world origin.
  std::array<double, 3> origin{};
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) origin[row] -= m[row][col] * double(g.dims[col] - 1) / 2.0;
  }
  for (int row = 0; row < 3; ++row) {
    w.put<float>(268 + 4 * row, static_cast<float>(origin[row]));
    for (int col = 0; col < 3; ++col) w.put<float>(280 + 16 * row + 4 * col, static_cast<float>(m[row][col]));
    w.put<float>(280 + 16 * row + 12, static_cast<float>(origin[row]));
  }
  w.raw(344, "n+1\0", 4);
  return w;
}

template <typename T>
void write_impl(const Volume<T>& vol, const std::filesystem::path& path, bool compress, Datatype datatype) {
  const HeaderWriter w = encode_header(vol.geometry(), datatype);
  const auto* payload = reinterpret_cast<const unsigned char*>(vol.voxels().data());
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    std::vector<T> swapped(vol.voxels().begin(), vol.voxels().end());
    for (auto& v : swapped) v = std::bit_cast<T>(byteswap32(std::bit_cast<std::uint32_t>(v)));
    emit(path, compress, w.bytes().data(), kVoxOffset, reinterpret_cast<const unsigned char*>(swapped.data()),
         swapped.size() * sizeof(T));
  } else {
    emit(path, compress, w.bytes().data(), kVoxOffset, payload, vol.size() * sizeof(T));
  }
}

}  // namespace

VolumeHeader read_header(const std::filesystem::path& path) { return decode_header(slurp(path)).header; }

CodeVolume read_codes(const std::filesystem::path& path) {
  const auto data = slurp(path);
  if (data.size() >= 4 && std::memcmp(data.data(), "CMV1", 4) == 0) return read_raw(path);
  const Decoded d = decode_header(data);
  if (d.header.datatype != Datatype::UInt8) {
    throw Error(ErrorCode::UnsupportedDatatype, "expected uint8 label data in " + path.string());
  }
  return {d.header.geometry, decode_payload<std::uint8_t>(data, d)};
}

LabelVolume read_labels(const std::filesystem::path& path) { return to_labels(read_codes(path)); }

IntensityVolume read_intensities(const std::filesystem::path& path) {
  const auto data = slurp(path);
  const Decoded d = decode_header(data);
  if (d.header.datatype != Datatype::Float32) {
    throw Error(ErrorCode::UnsupportedDatatype, "expected float32 data in " + path.string());
  }
  auto voxels = decode_payload<float>(data, d);
  if (d.slope != 0.0f && (d.slope != 1.0f || d.inter != 0.0f)) {
    for (auto& v : voxels) v = v * d.slope + d.inter;
  }
  return {d.header.geometry, std::move(voxels)};
}

AnyVolume read_volume(const std::filesystem::path& path) {
  const auto data = slurp(path);
  if (data.size() >= 4 && std::memcmp(data.data(), "CMV1", 4) == 0) return to_labels(read_raw(path));
  const Decoded d = decode_header(data);
  if (d.header.datatype == Datatype::UInt8) {
    return to_labels(CodeVolume(d.header.geometry, decode_payload<std::uint8_t>(data, d)));
  }
  return read_intensities(path);
}

void write_volume(const LabelVolume& vol, const std::filesystem::path& path, bool compress) {
  write_impl(vol, path, compress, Datatype::UInt8);
}

void write_volume(const IntensityVolume& vol, const std::filesystem::path& path, bool compress) {
  write_impl(vol, path, compress, Datatype::Float32);
}

void write_volume(const CodeVolume& vol, const std::filesystem::path& path, bool compress) {
  write_impl(vol, path, compress, Datatype::UInt8);
}

bool wants_gzip(const std::filesystem::path& path) { return path.extension() == ".gz"; }

void write_raw(const CodeVolume& vol, const std::filesystem::path& path) {
  std::array<unsigned char, 16> header{'C', 'M', 'V', '1'};
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<std::uint32_t>(vol.dims()[a]);
    for (int b = 0; b < 4; ++b) header[4 + 4 * a + b] = static_cast<unsigned char>((n >> (8 * b)) & 0xFF);
  }
  emit(path, false, header.data(), header.size(), vol.voxels().data(), vol.size());
}

CodeVolume read_raw(const std::filesystem::path& path) {
  const auto data = slurp(path);
  if (data.size() < 16 || std::memcmp(data.data(), "CMV1", 4) != 0) {
    throw Error(ErrorCode::MalformedHeader, "missing CMV1 magic");
  }
  Geometry g;
  for (int a = 0; a < 3; ++a) {
    std::uint32_t n = 0;
    for (int b = 0; b < 4; ++b) n |= std::uint32_t(data[4 + 4 * a + b]) << (8 * b);
    if (n == 0) throw Error(ErrorCode::MalformedHeader, "zero dimension");
    g.dims[a] = n;
  }
  if (data.size() != 16 + g.size()) throw Error(ErrorCode::MalformedHeader, "payload size does not match dims");
  return {g, std::vector<std::uint8_t>(data.begin() + 16, data.end())};
}

}  // namespace callosim::io
