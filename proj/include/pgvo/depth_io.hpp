#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pgvo/depth.hpp"
#include "pgvo/io.hpp"

namespace pgvo {

// DPTH1: "DPTH1 <width> <height> <z_min> <z_max>\n" then width*height
// row-major little-endian float32 values.

inline std::string encode_depth(const DepthImage& img) {
  std::string out = "DPTH1 " + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    " " + format_double(img.z_min()) + " " + format_double(img.z_max()) + "\n";
  out.reserve(out.size() + img.values().size() * 4);
  for (float v : img.values()) append_f32_le(out, v);
  return out;
}

inline DepthImage decode_depth(const std::string& bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw UsageError("bad depth file: missing header");
  std::istringstream header(bytes.substr(0, eol));
  std::string magic;
  int w = 0, h = 0;
  double z_min = 0, z_max = 0;
  header >> magic;
  if (magic != "DPTH1") throw UsageError("bad depth file magic: '" + magic + "'");
  if (!(header >> w >> h >> z_min >> z_max) || w <= 0 || h <= 0)
    throw UsageError("bad depth file header");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - eol - 1 != n * 4) throw UsageError("depth file payload size mismatch");
  std::vector<float> values(n);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + eol + 1;
  for (std::size_t i = 0; i < n; ++i) values[i] = read_f32_le(p + 4 * i);
  return {w, h, z_min, z_max, std::move(values)};
}

inline void save_depth(const fs::path& path, const DepthImage& img) {
  write_file_atomic(path, encode_depth(img));
}

inline DepthImage load_depth(const fs::path& path) { return decode_depth(read_file(path)); }

/// Binary 8-bit PGM, values scaled by 255 and rounded.
inline std::string encode_pgm(const SoftProjection& proj) {
  std::string out = "P5\n" + std::to_string(proj.cols) + " " + std::to_string(proj.rows) + "\n255\n";
  for (double v : proj.cells)
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  return out;
}

}  // namespace pgvo
