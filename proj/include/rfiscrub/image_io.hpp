#pragma once

// Complex-image file I/O and magnitude rendering.
//
// CIMG is a deliberately small bit-exact container:
//   offset 0:  magic "CIMG1\0" (6 bytes)
//   offset 6:  u32 little-endian row count (>= 1)
//   offset 10: u32 little-endian column count (>= 1)
//   offset 14: u8 precision code, 0 = 32-bit floats, 1 = 64-bit floats
//   offset 15: payload, row-major interleaved (real, imag) IEEE-754
//              little-endian floats
// Byte order is little-endian regardless of host. The reader validates
// every length before allocating and reports byte offsets in its errors.
//
// render_png writes an 8-bit grayscale magnitude view (dB-mapped) using a
// self-contained PNG encoder with stored (uncompressed) deflate blocks.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rfiscrub/core.hpp"

namespace rfiscrub {

namespace detail {

inline void put_u32le(std::vector<std::uint8_t> &b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline void put_u64le(std::vector<std::uint8_t> &b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
}

inline std::uint32_t get_u32le(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64le(const std::uint8_t *p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) {
    v = (v << 8) | p[i];
  }
  return v;
}

inline void put_f32le(std::vector<std::uint8_t> &b, float v) {
  put_u32le(b, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64le(std::vector<std::uint8_t> &b, double v) {
  put_u64le(b, std::bit_cast<std::uint64_t>(v));
}

inline float get_f32le(const std::uint8_t *p) {
  return std::bit_cast<float>(get_u32le(p));
}

inline double get_f64le(const std::uint8_t *p) {
  return std::bit_cast<double>(get_u64le(p));
}

constexpr char kCimgMagic[6] = {'C', 'I', 'M', 'G', '1', '\0'};
constexpr std::size_t kCimgHeaderSize = 15;

inline void write_file(const std::string &path,
                       const std::vector<std::uint8_t> &bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  f.write(reinterpret_cast<const char *>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw IoError("write to '" + path + "' failed");
  }
}

inline std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  const std::streamsize size = f.tellg();
  f.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) {
    f.read(reinterpret_cast<char *>(bytes.data()), size);
    if (!f) {
      throw IoError("read from '" + path + "' failed");
    }
  }
  return bytes;
}

} // namespace detail

/// Writes X to path in the CIMG layout. precision selects 32- or 64-bit
/// floats for the payload.
inline void write_cimg(const std::string &path, const ComplexImage &X,
                       unsigned precision = 64) {
  if (precision != 32 && precision != 64) {
    throw ParameterError("CIMG precision must be 32 or 64");
  }
  if (X.rows() > 0xffffffffull || X.cols() > 0xffffffffull) {
    throw ParameterError("image dimensions exceed the CIMG u32 limit");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(detail::kCimgHeaderSize +
                X.size() * (precision == 32 ? 8 : 16));
  for (char c : detail::kCimgMagic) {
    bytes.push_back(static_cast<std::uint8_t>(c));
  }
  detail::put_u32le(bytes, static_cast<std::uint32_t>(X.rows()));
  detail::put_u32le(bytes, static_cast<std::uint32_t>(X.cols()));
  bytes.push_back(precision == 32 ? 0 : 1);
  for (const cplx &v : X.samples()) {
    if (precision == 32) {
      detail::put_f32le(bytes, static_cast<float>(v.real()));
      detail::put_f32le(bytes, static_cast<float>(v.imag()));
    } else {
      detail::put_f64le(bytes, v.real());
      detail::put_f64le(bytes, v.imag());
    }
  }
  detail::write_file(path, bytes);
}

/// Parses a CIMG byte stream. Split out from the file reader so malformed
/// buffers can be exercised without touching the filesystem.
inline ComplexImage parse_cimg(const std::vector<std::uint8_t> &bytes) {
  if (bytes.size() < sizeof(detail::kCimgMagic) ||
      std::memcmp(bytes.data(), detail::kCimgMagic,
                  sizeof(detail::kCimgMagic)) != 0) {
    throw FormatError("bad CIMG magic at offset 0");
  }
  if (bytes.size() < detail::kCimgHeaderSize) {
    throw FormatError("truncated CIMG header: " +
                      std::to_string(bytes.size()) + " bytes, need " +
                      std::to_string(detail::kCimgHeaderSize));
  }
  const std::uint32_t rows = detail::get_u32le(bytes.data() + 6);
  const std::uint32_t cols = detail::get_u32le(bytes.data() + 10);
  if (rows == 0) {
    throw FormatError("zero row count at offset 6");
  }
  if (cols == 0) {
    throw FormatError("zero column count at offset 10");
  }
  const std::uint8_t code = bytes[14];
  if (code != 0 && code != 1) {
    throw FormatError("unknown precision code " + std::to_string(code) +
                      " at offset 14");
  }
  const std::uint64_t sample_bytes = code == 0 ? 8 : 16;
  const std::uint64_t expected =
      static_cast<std::uint64_t>(rows) * cols * sample_bytes;
  const std::uint64_t actual = bytes.size() - detail::kCimgHeaderSize;
  if (expected != actual) {
    throw FormatError("payload length mismatch: expected " +
                      std::to_string(expected) + " bytes, got " +
                      std::to_string(actual));
  }

  std::vector<cplx> data;
  data.reserve(static_cast<std::size_t>(rows) * cols);
  const std::uint8_t *p = bytes.data() + detail::kCimgHeaderSize;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(rows) * cols;
       ++i) {
    double re, im;
    if (code == 0) {
      re = detail::get_f32le(p);
      im = detail::get_f32le(p + 4);
      p += 8;
    } else {
      re = detail::get_f64le(p);
      im = detail::get_f64le(p + 8);
      p += 16;
    }
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw FormatError(
          "non-finite sample at offset " +
          std::to_string(detail::kCimgHeaderSize + i * sample_bytes));
    }
    data.emplace_back(re, im);
  }
  return ComplexImage(rows, cols, std::move(data));
}

/// Reads a CIMG file; 32-bit payloads are widened to the internal 64-bit
/// representation.
inline ComplexImage read_cimg(const std::string &path) {
  return parse_cimg(detail::read_file(path));
}

struct CimgFile {
  ComplexImage image;
  unsigned precision = 64; // stored payload width, 32 or 64
};

/// Like read_cimg, but also reports the stored precision so callers can
/// write results back at the width they arrived in.
inline CimgFile read_cimg_file(const std::string &path) {
  const std::vector<std::uint8_t> bytes = detail::read_file(path);
  CimgFile out;
  out.image = parse_cimg(bytes);
  out.precision = bytes[14] == 0 ? 32 : 64;
  return out;
}

namespace detail {

inline std::uint32_t crc32(const std::uint8_t *data, std::size_t len,
                           std::uint32_t crc = 0xffffffffu) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  }
  return crc;
}

inline std::uint32_t adler32(const std::uint8_t *data, std::size_t len) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

inline void put_u32be(std::vector<std::uint8_t> &b, std::uint32_t v) {
  b.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
}

inline void png_chunk(std::vector<std::uint8_t> &out, const char type[4],
                      const std::vector<std::uint8_t> &data) {
  put_u32be(out, static_cast<std::uint32_t>(data.size()));
  std::vector<std::uint8_t> body;
  body.reserve(4 + data.size());
  for (int i = 0; i < 4; ++i) {
    body.push_back(static_cast<std::uint8_t>(type[i]));
  }
  body.insert(body.end(), data.begin(), data.end());
  out.insert(out.end(), body.begin(), body.end());
  put_u32be(out, crc32(body.data(), body.size()) ^ 0xffffffffu);
}

/// zlib stream holding the raw bytes in stored (type 0) deflate blocks.
inline std::vector<std::uint8_t>
zlib_stored(const std::vector<std::uint8_t> &raw) {
  std::vector<std::uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  std::size_t pos = 0;
  do {
    const std::size_t chunk = std::min<std::size_t>(raw.size() - pos, 65535);
    const bool final = pos + chunk == raw.size();
    z.push_back(final ? 1 : 0);
    z.push_back(static_cast<std::uint8_t>(chunk & 0xff));
    z.push_back(static_cast<std::uint8_t>((chunk >> 8) & 0xff));
    z.push_back(static_cast<std::uint8_t>(~chunk & 0xff));
    z.push_back(static_cast<std::uint8_t>((~chunk >> 8) & 0xff));
    z.insert(z.end(), raw.begin() + static_cast<std::ptrdiff_t>(pos),
             raw.begin() + static_cast<std::ptrdiff_t>(pos + chunk));
    pos += chunk;
  } while (pos < raw.size());
  const std::uint32_t ad = adler32(raw.data(), raw.size());
  put_u32be(z, ad);
  return z;
}

} // namespace detail

/// Maps sample magnitudes to an 8-bit grayscale PNG: 20*log10(|x|/max|x|)
/// scaled linearly from [-dyn_range_db, 0] dB onto [0, 255]. Zero-magnitude
/// samples (and an all-zero image) render as 0.
inline void render_png(const ComplexImage &X, const std::string &path,
                       double dyn_range_db = 40.0) {
  if (!(dyn_range_db > 0.0)) {
    throw ParameterError("dyn_range_db must be positive");
  }
  double vmax = 0.0;
  for (const cplx &v : X.samples()) {
    vmax = std::max(vmax, std::abs(v));
  }

  std::vector<std::uint8_t> raw;
  raw.reserve(X.rows() * (X.cols() + 1));
  for (std::size_t m = 0; m < X.rows(); ++m) {
    raw.push_back(0); // scanline filter: none
    for (std::size_t n = 0; n < X.cols(); ++n) {
      const double mag = std::abs(X(m, n));
      std::uint8_t px = 0;
      if (vmax > 0.0 && mag > 0.0) {
        const double db = 20.0 * std::log10(mag / vmax);
        const double t = 1.0 + db / dyn_range_db; // [-dyn,0] -> [0,1]
        const double scaled = 255.0 * std::min(1.0, std::max(0.0, t));
        px = static_cast<std::uint8_t>(std::lround(scaled));
      }
      raw.push_back(px);
    }
  }

  std::vector<std::uint8_t> png;
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  png.insert(png.end(), sig, sig + 8);

  std::vector<std::uint8_t> ihdr;
  detail::put_u32be(ihdr, static_cast<std::uint32_t>(X.cols()));
  detail::put_u32be(ihdr, static_cast<std::uint32_t>(X.rows()));
  ihdr.push_back(8); // bit depth
  ihdr.push_back(0); // grayscale
  ihdr.push_back(0); // deflate
  ihdr.push_back(0); // adaptive filtering
  ihdr.push_back(0); // no interlace
  detail::png_chunk(png, "IHDR", ihdr);
  detail::png_chunk(png, "IDAT", detail::zlib_stored(raw));
  detail::png_chunk(png, "IEND", {});

  detail::write_file(path, png);
}

} // namespace rfiscrub
