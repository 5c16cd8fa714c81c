#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pgvo/camera.hpp"
#include "pgvo/error.hpp"

namespace pgvo {

/// Z-buffer depth in meters, row-major (v * width + u).
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, double z_min, double z_max, float fill = 0.0f)
      : DepthImage(width, height, z_min, z_max,
                   std::vector<float>(static_cast<std::size_t>(std::max(width, 0)) *
                                          static_cast<std::size_t>(std::max(height, 0)),
                                      fill)) {}

  DepthImage(int width, int height, double z_min, double z_max, std::vector<float> values)
      : width_(width), height_(height), z_min_(z_min), z_max_(z_max), values_(std::move(values)) {
    if (width <= 0 || height <= 0) throw UsageError("depth image size must be positive");
    if (!(z_min < z_max)) throw UsageError("depth range requires z_min < z_max");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw UsageError("depth buffer size does not match width*height");
    const float lo = static_cast<float>(z_min), hi = static_cast<float>(z_max);
    for (float v : values_)
      if (!(v >= lo && v <= hi)) throw UsageError("depth value outside [z_min, z_max]");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double z_min() const { return z_min_; }
  double z_max() const { return z_max_; }
  const std::vector<float>& values() const { return values_; }

  float at(int u, int v) const { return values_[index(u, v)]; }
  void set(int u, int v, double d) {
    values_[index(u, v)] = static_cast<float>(std::clamp(d, z_min_, z_max_));
  }

  /// Pixels at or below z_min are treated as missing returns. Values are
  /// stored as float, so the comparison is against z_min in float.
  bool valid(int u, int v) const { return at(u, v) > static_cast<float>(z_min_); }

  bool operator==(const DepthImage&) const = default;

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  double z_min_ = 0.0;
  double z_max_ = 1.0;
  std::vector<float> values_;
};

using PointCloud = std::vector<Vec3>;

inline void check_dims(const DepthImage& depth, const CameraIntrinsics& cam) {
  if (depth.width() != cam.width || depth.height() != cam.height)
    throw UsageError("depth image and intrinsics dimensions disagree");
}

/// (K^-1 (u + 0.5, v + 0.5, 1)) * depth(u, v) for every pixel, row-major.
inline PointCloud unproject(const DepthImage& depth, const CameraIntrinsics& cam) {
  check_dims(depth, cam);
  PointCloud pts;
  pts.reserve(static_cast<std::size_t>(depth.width()) * depth.height());
  for (int v = 0; v < depth.height(); ++v)
    for (int u = 0; u < depth.width(); ++u)
      pts.push_back(cam.ray(u + 0.5, v + 0.5) * static_cast<double>(depth.at(u, v)));
  return pts;
}

/// Same as unproject but skips missing returns (depth <= z_min).
inline PointCloud unproject_valid(const DepthImage& depth, const CameraIntrinsics& cam) {
  check_dims(depth, cam);
  PointCloud pts;
  for (int v = 0; v < depth.height(); ++v)
    for (int u = 0; u < depth.width(); ++u)
      if (depth.valid(u, v))
        pts.push_back(cam.ray(u + 0.5, v + 0.5) * static_cast<double>(depth.at(u, v)));
  return pts;
}

// ---------------------------------------------------------------------------
// One-hot depth discretization

/// Left edge of interval i: z_min + i * (z_max - z_min) / N.
inline double bin_edge(int i, int n, double z_min, double z_max) {
  return z_min + static_cast<double>(i) * (z_max - z_min) / static_cast<double>(n);
}

/// Zero-based channel of `d` over N equal half-open intervals [z_{i-1}, z_i).
/// Values at z_max fall into the last channel.
inline int depth_channel(double d, int n, double z_min, double z_max) {
  if (n < 1) throw UsageError("number of depth bins must be >= 1");
  if (d >= z_max) return n - 1;
  if (d <= z_min) return 0;
  int k = static_cast<int>(std::floor((d - z_min) * n / (z_max - z_min)));
  k = std::clamp(k, 0, n - 1);
  // Snap to the exact edges so membership matches the interval definition.
  while (k > 0 && d < bin_edge(k, n, z_min, z_max)) --k;
  while (k < n - 1 && d >= bin_edge(k + 1, n, z_min, z_max)) ++k;
  return k;
}

class DiscretizedDepth {
 public:
  DiscretizedDepth(int channels, int width, int height)
      : channels_(channels), width_(width), height_(height),
        planes_(static_cast<std::size_t>(channels) * width * height, 0) {}

  int channels() const { return channels_; }
  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t at(int channel, int u, int v) const { return planes_[index(channel, u, v)]; }
  void set(int channel, int u, int v, std::uint8_t x) { planes_[index(channel, u, v)] = x; }

  /// The channel holding the 1 at (u, v).
  int hot_channel(int u, int v) const {
    for (int c = 0; c < channels_; ++c)
      if (at(c, u, v)) return c;
    return -1;
  }

  bool operator==(const DiscretizedDepth&) const = default;

 private:
  std::size_t index(int c, int u, int v) const {
    return (static_cast<std::size_t>(c) * height_ + v) * width_ + u;
  }

  int channels_;
  int width_;
  int height_;
  std::vector<std::uint8_t> planes_;
};

inline DiscretizedDepth discretize_depth(const DepthImage& depth, int n) {
  if (n < 1) throw UsageError("number of depth bins must be >= 1");
  DiscretizedDepth out(n, depth.width(), depth.height());
  for (int v = 0; v < depth.height(); ++v)
    for (int u = 0; u < depth.width(); ++u)
      out.set(depth_channel(depth.at(u, v), n, depth.z_min(), depth.z_max()), u, v, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Soft top-down projection

/// Row-major grid of normalized point counts; row 0 is nearest the camera.
struct SoftProjection {
  int rows = 0;
  int cols = 0;
  std::vector<double> cells;

  double at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
  double max() const { return cells.empty() ? 0.0 : *std::max_element(cells.begin(), cells.end()); }
};

inline constexpr int kDefaultProjectionSize = 96;

/// Lateral extent of the projection grid: the leftmost and rightmost pixel
/// center rays evaluated at z_max.
inline std::pair<double, double> projection_x_bounds(const CameraIntrinsics& cam, double z_max) {
  const double x_lo = cam.ray(0.5, 0.0).x() * z_max;
  const double x_hi = cam.ray(cam.width - 0.5, 0.0).x() * z_max;
  return {std::min(x_lo, x_hi), std::max(x_lo, x_hi)};
}

/// Raw per-cell point counts before normalization.
inline std::vector<std::uint32_t> projection_counts(const DepthImage& depth,
                                                    const CameraIntrinsics& cam, int out_h,
                                                    int out_w) {
  if (out_h < 1 || out_w < 1) throw UsageError("projection resolution must be >= 1");
  check_dims(depth, cam);
  const auto [x_min, x_max] = projection_x_bounds(cam, depth.z_max());
  if (!(x_max > x_min)) throw UsageError("degenerate projection bounding box");
  const double z_min = depth.z_min(), z_max = depth.z_max();

  std::vector<std::uint32_t> counts(static_cast<std::size_t>(out_h) * out_w, 0);
  for (const Vec3& p : unproject_valid(depth, cam)) {
    const int row = std::clamp(static_cast<int>(std::floor(out_h * (p.z() - z_min) / (z_max - z_min))),
                               0, out_h - 1);
    const int col = std::clamp(static_cast<int>(std::floor(out_w * (p.x() - x_min) / (x_max - x_min))),
                               0, out_w - 1);
    ++counts[static_cast<std::size_t>(row) * out_w + col];
  }
  return counts;
}

inline SoftProjection soft_projection(const DepthImage& depth, const CameraIntrinsics& cam,
                                      int out_h = kDefaultProjectionSize,
                                      int out_w = kDefaultProjectionSize) {
  const auto counts = projection_counts(depth, cam, out_h, out_w);
  SoftProjection proj{out_h, out_w, std::vector<double>(counts.size(), 0.0)};
  const std::uint32_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  if (peak == 0) return proj;
  for (std::size_t i = 0; i < counts.size(); ++i)
    proj.cells[i] = static_cast<double>(counts[i]) / static_cast<double>(peak);
  return proj;
}

}  // namespace pgvo
