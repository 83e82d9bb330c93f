#include "lab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <memory>

namespace lab::io {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string encode_csv(const std::vector<Column>& columns) {
  if (columns.empty()) throw FormatError("csv: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows) {
      throw FormatError("csv: column '" + c.name + "' has " + std::to_string(c.values.size()) + " rows, expected " +
                        std::to_string(rows));
    }
    if (c.name.empty() || c.name.find_first_of(",\n\r") != std::string::npos) {
      throw FormatError("csv: invalid column name '" + c.name + "'");
    }
  }
  std::string out;
  out.reserve((rows + 1) * columns.size() * 12);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out += ',';
    out += columns[j].name;
  }
  out += '\n';
  std::array<char, 32> buf{};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      const double x = columns[j].values[i];
      if (!std::isfinite(x)) {
        throw FormatError("csv: non-finite value in column '" + columns[j].name + "' row " + std::to_string(i));
      }
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
      out.append(buf.data(), res.ptr);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<Column> parse_csv(std::string_view text) {
  if (text.empty() || text.back() != '\n') throw FormatError("csv: missing final newline");
  std::vector<std::string_view> lines = split(text.substr(0, text.size() - 1), '\n');
  std::vector<Column> cols;
  for (auto name : split(lines.front(), ',')) cols.push_back({std::string(name), {}});
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != cols.size()) throw FormatError("csv: row " + std::to_string(i) + " has wrong field count");
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0.0;
      const auto res = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
      if (res.ec != std::errc{} || res.ptr != cells[j].data() + cells[j].size()) {
        throw FormatError("csv: bad number '" + std::string(cells[j]) + "' in row " + std::to_string(i));
      }
      cols[j].values.push_back(v);
    }
  }
  return cols;
}

std::string encode_pgm(std::span<const int> values, std::size_t width, std::size_t height, int max_value) {
  if (width == 0 || height == 0) throw FormatError("pgm: empty image");
  if (values.size() != width * height) throw FormatError("pgm: raster size does not match dimensions");
  if (max_value < 1 || max_value > 65535) throw FormatError("pgm: max value must lie in [1, 65535]");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" + std::to_string(max_value) + "\n";
  const bool wide = max_value > 255;
  out.reserve(out.size() + values.size() * (wide ? 2 : 1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int v = values[i];
    if (v < 0 || v > max_value) {
      throw FormatError("pgm: sample " + std::to_string(v) + " at index " + std::to_string(i) + " outside [0, " +
                        std::to_string(max_value) + "]");
    }
    if (wide) out += static_cast<char>((v >> 8) & 0xFF);
    out += static_cast<char>(v & 0xFF);
  }
  return out;
}

std::string encode_ppm(std::span<const std::uint8_t> rgb, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw FormatError("ppm: empty image");
  if (rgb.size() != 3 * width * height) throw FormatError("ppm: raster size does not match dimensions");
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

Greymap decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string_view {
    if (pos >= bytes.size()) throw FormatError("pgm: truncated header");
    const std::size_t end = bytes.find('\n', pos) < bytes.find(' ', pos) ? bytes.find('\n', pos) : bytes.find(' ', pos);
    if (end == std::string_view::npos) throw FormatError("pgm: truncated header");
    const auto t = bytes.substr(pos, end - pos);
    pos = end + 1;
    return t;
  };
  auto number = [](std::string_view t) {
    std::size_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) throw FormatError("pgm: bad header number");
    return v;
  };
  if (token() != "P5") throw FormatError("pgm: not a binary greymap");
  Greymap g;
  g.width = number(token());
  g.height = number(token());
  g.max_value = static_cast<int>(number(token()));
  const std::size_t n = g.width * g.height;
  const std::size_t bpp = g.max_value > 255 ? 2 : 1;
  if (bytes.size() - pos != n * bpp) throw FormatError("pgm: raster length mismatch");
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
    g.values[i] = bpp == 2 ? (p[0] << 8) | p[1] : p[0];
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

struct Stop {
  double t;
  Rgb c;
};

struct PaletteDef {
  std::string_view name;
  std::vector<Stop> stops;
};

const std::vector<PaletteDef>& palettes() {
  static const std::vector<PaletteDef> defs{
      {"ember-v1", {{0.0, {0, 0, 0}}, {0.15, {90, 10, 20}}, {0.4, {220, 60, 20}}, {0.7, {255, 190, 40}}, {1.0, {255, 255, 230}}}},
      {"ocean-v1", {{0.0, {0, 7, 100}}, {0.16, {32, 107, 203}}, {0.42, {237, 255, 255}}, {0.64, {255, 170, 0}}, {0.86, {0, 2, 0}}, {1.0, {0, 7, 100}}}},
      {"grey-v1", {{0.0, {0, 0, 0}}, {1.0, {255, 255, 255}}}},
  };
  return defs;
}

const PaletteDef& find_palette(std::string_view name) {
  for (const auto& p : palettes()) {
    if (p.name == name) return p;
  }
  throw FormatError("unknown palette '" + std::string(name) + "'");
}

std::uint8_t lerp(std::uint8_t a, std::uint8_t b, double f) {
  return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * f));
}

}  // namespace

std::vector<std::string> palette_names() {
  std::vector<std::string> out;
  for (const auto& p : palettes()) out.emplace_back(p.name);
  return out;
}

bool has_palette(std::string_view name) {
  return std::any_of(palettes().begin(), palettes().end(), [&](const PaletteDef& p) { return p.name == name; });
}

Rgb palette_color(std::string_view name, double t) {
  const auto& stops = find_palette(name).stops;
  if (!(t > 0.0)) return stops.front().c;
  if (t >= 1.0) return stops.back().c;
  std::size_t i = 1;
  while (stops[i].t < t) ++i;
  const Stop& a = stops[i - 1];
  const Stop& b = stops[i];
  const double f = (t - a.t) / (b.t - a.t);
  return {lerp(a.c.r, b.c.r, f), lerp(a.c.g, b.c.g, f), lerp(a.c.b, b.c.b, f)};
}

std::vector<std::uint8_t> colorize_escape(std::string_view palette, std::span<const double> values, int max_iter) {
  find_palette(palette);
  std::vector<std::uint8_t> rgb(values.size() * 3, 0);
  const double scale = 1.0 / static_cast<double>(max_iter);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= max_iter) continue;
    const Rgb c = palette_color(palette, std::sqrt(std::max(0.0, values[i]) * scale));
    rgb[3 * i] = c.r;
    rgb[3 * i + 1] = c.g;
    rgb[3 * i + 2] = c.b;
  }
  return rgb;
}

std::vector<std::uint8_t> colorize_basins(std::span<const int> labels, std::span<const int> iterations, int max_iter) {
  if (labels.size() != iterations.size()) throw FormatError("basins: label and iteration grids differ in size");
  static constexpr Rgb hues[3] = {{230, 60, 50}, {60, 180, 75}, {50, 110, 230}};
  std::vector<std::uint8_t> rgb(labels.size() * 3, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    const double shade = 1.0 - 0.75 * std::min(1.0, static_cast<double>(iterations[i]) / std::min(max_iter, 32));
    const Rgb h = hues[labels[i] % 3];
    rgb[3 * i] = static_cast<std::uint8_t>(std::lround(h.r * shade));
    rgb[3 * i + 1] = static_cast<std::uint8_t>(std::lround(h.g * shade));
    rgb[3 * i + 2] = static_cast<std::uint8_t>(std::lround(h.b * shade));
  }
  return rgb;
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64: length is not a multiple of 4");
  std::string out(3 * text.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw FormatError("base64: invalid input");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string pack_f32_le(std::span<const double> values) {
  std::string out(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

std::vector<float> unpack_f32_le(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw FormatError("f32: byte count is not a multiple of 4");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace lab::io
