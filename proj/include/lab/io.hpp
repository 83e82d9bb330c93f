#pragma once

// Output encoders shared by the CLI and the server: CSV, binary PGM/PPM,
// versioned colour palettes, SHA-256 digests and base64 packing.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lab::io {

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// CSV

struct Column {
  std::string name;
  std::vector<double> values;
};

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Header line of names, then one row per index; '\n' line ends, no trailing
/// separator. Rejects ragged columns and names containing ',' or newlines.
std::string encode_csv(const std::vector<Column>& columns);

/// Inverse of encode_csv.
std::vector<Column> parse_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Netpbm

/// Binary greymap: "P5\n{w} {h}\n{max}\n" then the raster, top row first,
/// one byte per sample for max <= 255, otherwise two bytes big-endian.
std::string encode_pgm(std::span<const int> values, std::size_t width, std::size_t height, int max_value);

/// Binary pixmap from interleaved RGB bytes.
std::string encode_ppm(std::span<const std::uint8_t> rgb, std::size_t width, std::size_t height);

struct Greymap {
  std::size_t width = 0;
  std::size_t height = 0;
  int max_value = 0;
  std::vector<int> values;
};

Greymap decode_pgm(std::string_view bytes);

// ---------------------------------------------------------------------------
// Palettes. Names carry a version suffix; a published palette never changes.

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

/// Registered palette names, e.g. "ember-v1".
std::vector<std::string> palette_names();
bool has_palette(std::string_view name);

/// Colour for a normalised value t in [0, 1].
Rgb palette_color(std::string_view name, double t);

/// Escape-time colouring: interior pixels (value >= max_iter) are black,
/// others are coloured by value / max_iter through the palette.
std::vector<std::uint8_t> colorize_escape(std::string_view palette, std::span<const double> values, int max_iter);

/// Newton basins: one hue per root, shaded by iteration count; label -1 is black.
std::vector<std::uint8_t> colorize_basins(std::span<const int> labels, std::span<const int> iterations, int max_iter);

// ---------------------------------------------------------------------------
// Digests and packing

std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// Little-endian IEEE-754 float32, in order.
std::string pack_f32_le(std::span<const double> values);
std::vector<float> unpack_f32_le(std::string_view bytes);

}  // namespace lab::io
