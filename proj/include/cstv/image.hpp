#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <png.h>
#include <sstream>
#include <string>
#include <vector>

#include "cstv/error.hpp"
#include "cstv/planar.hpp"
#include "cstv/quaternion.hpp"

namespace cstv {

/// RGB image with channels nominally in [0,1]. Values are never clamped
/// except on export.
using ColorImage = PlanarImage<3>;

/// CIELAB (D65) image: planes are L*, a*, b*.
using LabImage = PlanarImage<3>;

// ---------------------------------------------------------------------------
// Quaternion field conversion

inline QuaternionField to_quaternion_field(const ColorImage& img) {
  QuaternionField f(img.width(), img.height());
  for (std::size_t c = 0; c < 3; ++c) f.plane(c + 1) = img.plane(c);
  return f;
}

enum class RealPartPolicy { discard };

struct RealPartDiagnostics {
  double real_part_norm = 0.0;  // Frobenius norm of the dropped real plane
};

inline ColorImage from_quaternion_field(const QuaternionField& f, RealPartPolicy = RealPartPolicy::discard,
                                        RealPartDiagnostics* diag = nullptr) {
  ColorImage img(f.width(), f.height());
  for (std::size_t c = 0; c < 3; ++c) img.plane(c) = f.plane(c + 1);
  if (diag) {
    double s = 0.0;
    for (double v : f.plane(0)) s += v * v;
    diag->real_part_norm = std::sqrt(s);
  }
  return img;
}

// ---------------------------------------------------------------------------
// Colour conversion

namespace detail {

inline double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace detail

/// sRGB (IEC 61966-2-1) -> XYZ -> CIELAB with the D65 reference white.
inline std::array<double, 3> rgb_to_lab(double r, double g, double b) {
  const double rl = detail::srgb_to_linear(r);
  const double gl = detail::srgb_to_linear(g);
  const double bl = detail::srgb_to_linear(b);
  const double x = 0.412453 * rl + 0.357580 * gl + 0.180423 * bl;
  const double y = 0.212671 * rl + 0.715160 * gl + 0.072169 * bl;
  const double z = 0.019334 * rl + 0.119193 * gl + 0.950227 * bl;
  const double fx = detail::lab_f(x / 0.95047);
  const double fy = detail::lab_f(y / 1.0);
  const double fz = detail::lab_f(z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline LabImage rgb_to_lab(const ColorImage& img) {
  LabImage lab(img.width(), img.height());
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const auto v = rgb_to_lab(img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]);
    for (std::size_t c = 0; c < 3; ++c) lab.plane(c)[i] = v[c];
  }
  return lab;
}

// ---------------------------------------------------------------------------
// File I/O: PNG (8/16-bit RGB) and binary PPM (P6).

namespace detail {

inline bool ends_with_ci(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) != suffix[i]) return false;
  return true;
}

inline ColorImage from_samples(const std::vector<std::uint16_t>& samples, std::size_t w, std::size_t h,
                               unsigned maxval) {
  ColorImage img(w, h);
  for (std::size_t i = 0; i < w * h; ++i)
    for (std::size_t c = 0; c < 3; ++c) img.plane(c)[i] = samples[i * 3 + c] / static_cast<double>(maxval);
  return img;
}

inline std::vector<std::uint16_t> to_samples(const ColorImage& img, unsigned maxval) {
  std::vector<std::uint16_t> out(img.pixels() * 3);
  for (std::size_t i = 0; i < img.pixels(); ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = std::clamp(img.plane(c)[i], 0.0, 1.0);
      out[i * 3 + c] = static_cast<std::uint16_t>(std::lround(v * maxval));
    }
  return out;
}

inline ColorImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  auto token = [&]() {
    std::string t;
    while (in) {
      int ch = in.get();
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(ch)) {
        if (!t.empty()) return t;
      } else if (ch != EOF) {
        t.push_back(static_cast<char>(ch));
      }
    }
    return t;
  };
  if (token() != "P6") throw IoError(path + ": not a binary PPM (P6)");
  std::size_t w = 0, h = 0;
  unsigned maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = static_cast<unsigned>(std::stoul(token()));
  } catch (const std::exception&) {
    throw IoError(path + ": corrupt PPM header");
  }
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw IoError(path + ": corrupt PPM header");
  const std::size_t bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(w * h * 3 * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw IoError(path + ": truncated PPM data");
  std::vector<std::uint16_t> samples(w * h * 3);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = bytes == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return from_samples(samples, w, h, maxval);
}

inline void save_ppm(const std::string& path, const ColorImage& img, int bit_depth) {
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  const auto samples = to_samples(img, maxval);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
  for (std::uint16_t s : samples) {
    if (bit_depth == 8) {
      out.put(static_cast<char>(s));
    } else {
      out.put(static_cast<char>(s >> 8));
      out.put(static_cast<char>(s & 0xff));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

inline ColorImage load_png(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw IoError(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<std::uint16_t> samples;
  std::vector<unsigned char> buf;
  std::vector<png_bytep> rows;
  std::size_t w = 0, h = 0;
  unsigned maxval = 255;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // host order on little-endian hosts
  png_read_update_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  if (png_get_channels(png, info) != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG layout");
  }
  maxval = out_depth == 16 ? 65535u : 255u;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buf.resize(rowbytes * h);
  rows.resize(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  samples.resize(w * h * 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w * 3; ++x) {
      if (out_depth == 16) {
        std::uint16_t v;
        std::memcpy(&v, rows[y] + 2 * x, 2);
        samples[y * w * 3 + x] = v;
      } else {
        samples[y * w * 3 + x] = rows[y][x];
      }
    }
  return from_samples(samples, w, h, maxval);
}

inline void save_png(const std::string& path, const ColorImage& img, int bit_depth) {
  const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
  const auto samples = to_samples(img, maxval);
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  const std::size_t w = img.width(), h = img.height();
  const std::size_t bps = bit_depth == 8 ? 1 : 2;
  std::vector<unsigned char> buf(w * h * 3 * bps);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bps == 1) {
      buf[i] = static_cast<unsigned char>(samples[i]);
    } else {
      buf[2 * i] = static_cast<unsigned char>(samples[i] >> 8);  // PNG is big-endian
      buf[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buf.data() + y * w * 3 * bps;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Reads an 8- or 16-bit RGB PNG or binary PPM, scaled to [0,1] by the
/// bit-depth maximum.
inline ColorImage load_image(const std::string& path) {
  if (detail::ends_with_ci(path, ".png")) return detail::load_png(path);
  if (detail::ends_with_ci(path, ".ppm") || detail::ends_with_ci(path, ".pnm")) return detail::load_ppm(path);
  throw IoError(path + ": unsupported image format (expected .png or .ppm)");
}

/// Clamps to [0,1] and quantizes to `bit_depth` (8 or 16) bits.
inline void save_image(const std::string& path, const ColorImage& img, int bit_depth = 16) {
  if (bit_depth != 8 && bit_depth != 16) throw ConfigError("bit depth must be 8 or 16");
  if (img.empty()) throw ConfigError("cannot save an empty image");
  if (detail::ends_with_ci(path, ".png")) return detail::save_png(path, img, bit_depth);
  if (detail::ends_with_ci(path, ".ppm") || detail::ends_with_ci(path, ".pnm"))
    return detail::save_ppm(path, img, bit_depth);
  throw IoError(path + ": unsupported image format (expected .png or .ppm)");
}

}  // namespace cstv
