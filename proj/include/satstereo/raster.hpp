// Copyright (c) 2026 satstereo contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SATSTEREO_RASTER_HPP_
#define SATSTEREO_RASTER_HPP_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "satstereo/types.hpp"

namespace satstereo {

inline constexpr float kNoData = std::numeric_limits<float>::quiet_NaN();

/// Single-channel float image. NaN marks no-data. Pixel (x, y) is sampled at
/// integer centers, row y = 0 at the top.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, float fill = 0.0f)
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  float& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  float at(int x, int y) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  bool valid(int x, int y) const { return std::isfinite(at(x, y)); }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  /// Bilinear sample at (u, v); NaN outside [0, w-1] x [0, h-1] or when any
  /// contributing pixel is no-data.
  float bilinear(double u, double v) const {
    if (!(u >= 0.0 && u <= width_ - 1.0 && v >= 0.0 && v <= height_ - 1.0)) {
      return kNoData;
    }
    int x0 = static_cast<int>(u);
    int y0 = static_cast<int>(v);
    if (x0 == width_ - 1) x0--;
    if (y0 == height_ - 1) y0--;
    if (x0 < 0) x0 = 0;
    if (y0 < 0) y0 = 0;
    const double fx = u - x0, fy = v - y0;
    const float v00 = at(x0, y0), v10 = at(x0 + 1, y0);
    const float v01 = at(x0, y0 + 1), v11 = at(x0 + 1, y0 + 1);
    return static_cast<float>((1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
                              fy * ((1.0 - fx) * v01 + fx * v11));
  }

 private:
  int width_ = 0, height_ = 0;
  std::vector<float> data_;
};

/// 8-bit image (tonemapped LDR output).
struct Raster8 {
  int width = 0, height = 0;
  std::vector<uint8_t> data;

  Raster8() = default;
  Raster8(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}
  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x];
  }

  /// Intensities mapped to [0, 1] for matching and filtering.
  Raster to_float() const {
    Raster out(width, height);
    for (size_t i = 0; i < data.size(); ++i) {
      out.data()[i] = static_cast<float>(data[i]) / 255.0f;
    }
    return out;
  }
};

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
}

inline bool host_is_little_endian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t*>(&probe) == 1;
}

}  // namespace detail

/// PFM: float32 scanlines stored bottom-to-top; negative scale marks
/// little-endian data. No-data cells are NaN.
inline void write_pfm(const std::string& path, const Raster& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
  std::vector<float> row(img.width());
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) row[x] = img.at(x, y);
    out.write(reinterpret_cast<const char*>(row.data()),
              row.size() * sizeof(float));
  }
  if (!out) throw ConfigError("write failed: " + path);
}

inline Raster read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw ConfigError("not a grayscale PFM: " + path);
  int w = 0, h = 0;
  double scale = 0.0;
  in >> w >> h >> scale;
  in.get();  // single whitespace after the scale
  if (w <= 0 || h <= 0 || scale == 0.0) throw ConfigError("bad PFM header: " + path);
  Raster img(w, h);
  std::vector<float> row(w);
  const bool flip_endian = (scale < 0.0) != detail::host_is_little_endian();
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw ConfigError("truncated PFM: " + path);
    for (int x = 0; x < w; ++x) {
      float v = row[x];
      if (flip_endian) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      img.at(x, y) = v;
    }
  }
  return img;
}

/// 16-bit PGM (P5, maxval 65535, big-endian samples per netpbm).
inline void write_pgm16(const std::string& path, const Raster& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      float v = img.at(x, y);
      if (!std::isfinite(v)) v = 0.0f;
      const uint16_t q = static_cast<uint16_t>(
          std::min(65535.0f, std::max(0.0f, std::round(v))));
      const uint8_t bytes[2] = {static_cast<uint8_t>(q >> 8),
                                static_cast<uint8_t>(q & 0xff)};
      out.write(reinterpret_cast<const char*>(bytes), 2);
    }
  }
  if (!out) throw ConfigError("write failed: " + path);
}

inline void write_pgm8(const std::string& path, const Raster8& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  if (!out) throw ConfigError("write failed: " + path);
}

/// Reads an 8- or 16-bit P5 PGM into a float raster (values 0..maxval).
inline Raster read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw ConfigError("not a binary PGM: " + path);
  detail::skip_pnm_whitespace(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  detail::skip_pnm_whitespace(in);
  in >> h;
  detail::skip_pnm_whitespace(in);
  in >> maxval;
  in.get();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw ConfigError("bad PGM header: " + path);
  }
  Raster img(w, h);
  if (maxval < 256) {
    std::vector<uint8_t> row(w);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), row.size());
      if (!in) throw ConfigError("truncated PGM: " + path);
      for (int x = 0; x < w; ++x) img.at(x, y) = row[x];
    }
  } else {
    std::vector<uint8_t> row(2 * w);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), row.size());
      if (!in) throw ConfigError("truncated PGM: " + path);
      for (int x = 0; x < w; ++x) {
        img.at(x, y) = static_cast<float>((row[2 * x] << 8) | row[2 * x + 1]);
      }
    }
  }
  return img;
}

/// Loads an HDR input raster by extension (.pfm or .pgm).
inline Raster read_raster_auto(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".pgm") return read_pgm(path);
  throw ConfigError("unsupported raster format: " + path);
}

}  // namespace satstereo

#endif  // SATSTEREO_RASTER_HPP_
