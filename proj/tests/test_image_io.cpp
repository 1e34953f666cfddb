// Checks for CIMG serialization and PNG rendering: bit-exact round trips,
// a frozen on-disk layout for a one-sample file, malformed-stream errors
// with byte offsets, checksum known-answer values, and the dB pixel
// mapping verified through an independent PNG reader.

#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rfiscrub/core.hpp"
#include "rfiscrub/image_io.hpp"

#include "support/oracles.hpp"

using namespace rfiscrub;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

void le32(std::vector<std::uint8_t> &b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
}

void le_f32(std::vector<std::uint8_t> &b, float v) {
  le32(b, std::bit_cast<std::uint32_t>(v));
}

void le_f64(std::vector<std::uint8_t> &b, double v) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  le32(b, static_cast<std::uint32_t>(u & 0xffffffffull));
  le32(b, static_cast<std::uint32_t>(u >> 32));
}

std::vector<std::uint8_t> cimg_header(std::uint32_t rows, std::uint32_t cols,
                                      std::uint8_t code) {
  std::vector<std::uint8_t> b = {'C', 'I', 'M', 'G', '1', '\0'};
  le32(b, rows);
  le32(b, cols);
  b.push_back(code);
  return b;
}

// Bitwise reference CRC-32 (reflected 0xedb88320 polynomial) and Adler-32,
// written without tables so they share nothing with the implementation.
std::uint32_t ref_crc32(const std::uint8_t *d, std::size_t n) {
  std::uint32_t c = 0xffffffffu;
  for (std::size_t i = 0; i < n; ++i) {
    c ^= d[i];
    for (int k = 0; k < 8; ++k) {
      c = (c & 1) ? (c >> 1) ^ 0xedb88320u : c >> 1;
    }
  }
  return c ^ 0xffffffffu;
}

std::uint32_t ref_adler32(const std::uint8_t *d, std::size_t n) {
  std::uint64_t a = 1, b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a = (a + d[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return static_cast<std::uint32_t>((b << 16) | a);
}

} // namespace

TEST_CASE("64-bit CIMG round trip is bit exact") {
  const ComplexImage X = oracles::random_image(7, 5, 201);
  const std::string path = "io_roundtrip_f64.cimg";
  write_cimg(path, X, 64);

  REQUIRE(oracles::bitwise_equal(read_cimg(path), X));

  const CimgFile f = read_cimg_file(path);
  REQUIRE(f.precision == 64);
  REQUIRE(oracles::bitwise_equal(f.image, X));
}

TEST_CASE("32-bit CIMG round trip widens through float exactly") {
  const ComplexImage X = oracles::random_image(6, 9, 202);
  const std::string path = "io_roundtrip_f32.cimg";
  write_cimg(path, X, 32);

  ComplexImage expected(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.size(); ++i) {
    expected.samples()[i] =
        cplx{static_cast<double>(static_cast<float>(X.samples()[i].real())),
             static_cast<double>(static_cast<float>(X.samples()[i].imag()))};
  }

  const CimgFile f = read_cimg_file(path);
  REQUIRE(f.precision == 32);
  REQUIRE(oracles::bitwise_equal(f.image, expected));
}

TEST_CASE("write_cimg defaults to 64-bit and validates precision") {
  const ComplexImage X = oracles::random_image(3, 3, 203);
  const std::string path = "io_default_precision.cimg";
  write_cimg(path, X);
  REQUIRE(read_cimg_file(path).precision == 64);
  REQUIRE_THROWS_AS(write_cimg(path, X, 16), ParameterError);
}

TEST_CASE("one-sample 32-bit file has the frozen 23-byte layout") {
  ComplexImage X(1, 1);
  X(0, 0) = cplx{1.5, -2.25};
  const std::string path = "io_frozen_single.cimg";
  write_cimg(path, X, 32);

  const std::vector<std::uint8_t> expected = {
      'C',  'I',  'M',  'G',  '1',  0x00,       // magic
      0x01, 0x00, 0x00, 0x00,                   // rows = 1
      0x01, 0x00, 0x00, 0x00,                   // cols = 1
      0x00,                                     // 32-bit payload
      0x00, 0x00, 0xc0, 0x3f,                   // 1.5f
      0x00, 0x00, 0x10, 0xc0,                   // -2.25f
  };
  REQUIRE(oracles::read_file_bytes(path) == expected);
}

TEST_CASE("parse_cimg rejects malformed streams with byte offsets") {
  SECTION("empty and bad magic") {
    REQUIRE_THROWS_MATCHES(parse_cimg({}), FormatError,
                           MessageMatches(ContainsSubstring("offset 0")));
    std::vector<std::uint8_t> b = cimg_header(1, 1, 0);
    b[4] = '2';
    le_f32(b, 0.0f);
    le_f32(b, 0.0f);
    REQUIRE_THROWS_MATCHES(parse_cimg(b), FormatError,
                           MessageMatches(ContainsSubstring("offset 0")));
  }

  SECTION("truncated header") {
    std::vector<std::uint8_t> b = {'C', 'I', 'M', 'G', '1', 0x00, 0x01,
                                   0x00, 0x00, 0x00};
    REQUIRE_THROWS_MATCHES(parse_cimg(b), FormatError,
                           MessageMatches(ContainsSubstring("truncated")));
  }

  SECTION("zero dimensions") {
    REQUIRE_THROWS_MATCHES(parse_cimg(cimg_header(0, 1, 0)), FormatError,
                           MessageMatches(ContainsSubstring("offset 6")));
    REQUIRE_THROWS_MATCHES(parse_cimg(cimg_header(1, 0, 0)), FormatError,
                           MessageMatches(ContainsSubstring("offset 10")));
  }

  SECTION("unknown precision code") {
    std::vector<std::uint8_t> b = cimg_header(1, 1, 7);
    le_f32(b, 0.0f);
    le_f32(b, 0.0f);
    REQUIRE_THROWS_MATCHES(parse_cimg(b), FormatError,
                           MessageMatches(ContainsSubstring("offset 14")));
  }

  SECTION("payload length mismatch") {
    std::vector<std::uint8_t> b = cimg_header(1, 1, 0);
    le_f32(b, 0.0f);
    b.push_back(0x00);
    b.push_back(0x00);
    b.push_back(0x00); // 7 of the 8 required bytes
    REQUIRE_THROWS_MATCHES(
        parse_cimg(b), FormatError,
        MessageMatches(ContainsSubstring("expected 8 bytes, got 7")));
  }

  SECTION("non-finite samples carry the offending offset") {
    std::vector<std::uint8_t> b = cimg_header(1, 1, 1);
    le_f64(b, std::numeric_limits<double>::quiet_NaN());
    le_f64(b, 0.0);
    REQUIRE_THROWS_MATCHES(parse_cimg(b), FormatError,
                           MessageMatches(ContainsSubstring("offset 15")));

    std::vector<std::uint8_t> c = cimg_header(1, 2, 1);
    le_f64(c, 0.0);
    le_f64(c, 0.0);
    le_f64(c, 1.0);
    le_f64(c, std::numeric_limits<double>::infinity());
    REQUIRE_THROWS_MATCHES(parse_cimg(c), FormatError,
                           MessageMatches(ContainsSubstring("offset 31")));
  }

  SECTION("a well-formed hand-built stream parses") {
    std::vector<std::uint8_t> b = cimg_header(1, 2, 0);
    le_f32(b, 0.5f);
    le_f32(b, -1.0f);
    le_f32(b, 2.0f);
    le_f32(b, 0.25f);
    const ComplexImage img = parse_cimg(b);
    REQUIRE(img.rows() == 1);
    REQUIRE(img.cols() == 2);
    REQUIRE(img(0, 0) == cplx{0.5, -1.0});
    REQUIRE(img(0, 1) == cplx{2.0, 0.25});
  }
}

TEST_CASE("read_cimg reports missing files as I/O errors") {
  REQUIRE_THROWS_AS(read_cimg("io_no_such_file.cimg"), IoError);
}

TEST_CASE("checksums match published known-answer values") {
  const std::uint8_t digits[9] = {'1', '2', '3', '4', '5', '6', '7', '8',
                                  '9'};
  REQUIRE(ref_crc32(digits, 9) == 0xcbf43926u);
  REQUIRE((detail::crc32(digits, 9) ^ 0xffffffffu) == 0xcbf43926u);

  const std::uint8_t wiki[9] = {'W', 'i', 'k', 'i', 'p', 'e', 'd', 'i', 'a'};
  REQUIRE(ref_adler32(wiki, 9) == 0x11e60398u);
  REQUIRE(detail::adler32(wiki, 9) == 0x11e60398u);

  // the two implementations agree on an arbitrary longer message
  std::vector<std::uint8_t> msg(1000);
  for (std::size_t i = 0; i < msg.size(); ++i) {
    msg[i] = static_cast<std::uint8_t>((i * 37 + 11) & 0xff);
  }
  REQUIRE((detail::crc32(msg.data(), msg.size()) ^ 0xffffffffu) ==
          ref_crc32(msg.data(), msg.size()));
  REQUIRE(detail::adler32(msg.data(), msg.size()) ==
          ref_adler32(msg.data(), msg.size()));
}

TEST_CASE("render_png maps magnitudes onto the dB ramp") {
  ComplexImage X(2, 2);
  X(0, 0) = cplx{0.6, 0.8};   // magnitude 1    -> 255
  X(0, 1) = cplx{0.0, 0.1};   // -20 dB         -> 128
  X(1, 0) = cplx{-0.01, 0.0}; // -40 dB         -> 0
  X(1, 1) = cplx{0.0, 0.0};   // zero magnitude -> 0
  const std::string path = "io_png_ramp.png";
  render_png(X, path, 40.0);

  const oracles::GrayPng png =
      oracles::parse_gray_png(oracles::read_file_bytes(path));
  REQUIRE(png.width == 2);
  REQUIRE(png.height == 2);
  REQUIRE(png.pixels == std::vector<std::uint8_t>{255, 128, 0, 0});
}

TEST_CASE("render_png handles flat and empty-magnitude images") {
  SECTION("constant magnitude renders full white") {
    ComplexImage X(3, 4);
    for (cplx &v : X.samples()) {
      v = cplx{3.0, -4.0};
    }
    render_png(X, "io_png_flat.png");
    const oracles::GrayPng png =
        oracles::parse_gray_png(oracles::read_file_bytes("io_png_flat.png"));
    REQUIRE(png.pixels == std::vector<std::uint8_t>(12, 255));
  }

  SECTION("all-zero image renders black") {
    render_png(ComplexImage(3, 4), "io_png_zero.png");
    const oracles::GrayPng png =
        oracles::parse_gray_png(oracles::read_file_bytes("io_png_zero.png"));
    REQUIRE(png.pixels == std::vector<std::uint8_t>(12, 0));
  }

  SECTION("dynamic range must be positive") {
    REQUIRE_THROWS_AS(render_png(ComplexImage(2, 2), "io_png_bad.png", 0.0),
                      ParameterError);
  }
}

TEST_CASE("render_png emits valid chunk CRCs and zlib trailer") {
  const ComplexImage X = oracles::random_image(9, 11, 204);
  const std::string path = "io_png_structure.png";
  render_png(X, path);
  const std::vector<std::uint8_t> bytes = oracles::read_file_bytes(path);

  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool saw_end = false;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = oracles::be32(&bytes[pos]);
    REQUIRE(pos + 12 + len <= bytes.size());
    const std::uint32_t stored_crc = oracles::be32(&bytes[pos + 8 + len]);
    REQUIRE(stored_crc == ref_crc32(&bytes[pos + 4], 4 + len));
    const std::string type(reinterpret_cast<const char *>(&bytes[pos + 4]),
                           4);
    if (type == "IDAT") {
      idat.insert(idat.end(), &bytes[pos + 8], &bytes[pos + 8 + len]);
    }
    pos += 12 + len;
    if (type == "IEND") {
      saw_end = true;
      break;
    }
  }
  REQUIRE(saw_end);
  REQUIRE(pos == bytes.size());

  // reconstruct the raw scanlines and check the zlib adler32 trailer
  const oracles::GrayPng png = oracles::parse_gray_png(bytes);
  std::vector<std::uint8_t> raw;
  for (std::uint32_t r = 0; r < png.height; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), png.pixels.begin() + r * png.width,
               png.pixels.begin() + (r + 1) * png.width);
  }
  REQUIRE(idat.size() >= 4);
  const std::uint32_t trailer = oracles::be32(&idat[idat.size() - 4]);
  REQUIRE(trailer == ref_adler32(raw.data(), raw.size()));
}

TEST_CASE("render_png splits large images across stored deflate blocks") {
  const ComplexImage X = oracles::random_image(256, 256, 205);
  const std::string path = "io_png_large.png";
  render_png(X, path);
  const oracles::GrayPng png =
      oracles::parse_gray_png(oracles::read_file_bytes(path));
  REQUIRE(png.width == 256);
  REQUIRE(png.height == 256);
  REQUIRE(png.pixels.size() == 65536);

  // spot-check one pixel against the documented mapping
  double vmax = 0.0;
  for (const cplx &v : X.samples()) {
    vmax = std::max(vmax, std::abs(v));
  }
  const double mag = std::abs(X(17, 203));
  std::uint8_t expected = 0;
  if (mag > 0.0) {
    const double t = 1.0 + 20.0 * std::log10(mag / vmax) / 40.0;
    expected = static_cast<std::uint8_t>(
        std::lround(255.0 * std::min(1.0, std::max(0.0, t))));
  }
  REQUIRE(png.pixels[17 * 256 + 203] == expected);
}
