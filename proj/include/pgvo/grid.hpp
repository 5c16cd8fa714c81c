#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pgvo/error.hpp"
#include "pgvo/random.hpp"
#include "pgvo/se2.hpp"

namespace pgvo {

struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};

/// Planar occupancy map. World coordinates (x, z) in meters map to
/// col = floor(x / resolution), row = floor(z / resolution). The outer ring of
/// cells is always occupied.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, std::vector<std::uint8_t> occupied)
      : width_(width), height_(height), resolution_(resolution), cells_(std::move(occupied)) {
    if (width < 3 || height < 3) throw UsageError("grid must be at least 3x3 cells");
    if (!(resolution > 0.0)) throw UsageError("grid resolution must be positive");
    if (cells_.size() != static_cast<std::size_t>(width) * height)
      throw UsageError("grid cell count does not match width*height");
    for (int c = 0; c < width; ++c)
      if (!occupied_cell(c, 0) || !occupied_cell(c, height - 1))
        throw UsageError("grid boundary cells must be occupied");
    for (int r = 0; r < height; ++r)
      if (!occupied_cell(0, r) || !occupied_cell(width - 1, r))
        throw UsageError("grid boundary cells must be occupied");
  }

  /// Empty room of the given interior size (meters) surrounded by a one-cell wall.
  static OccupancyGrid empty_room(double width_m, double height_m, double resolution) {
    const int w = static_cast<int>(std::lround(width_m / resolution)) + 2;
    const int h = static_cast<int>(std::lround(height_m / resolution)) + 2;
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(w) * h, 0);
    for (int c = 0; c < w; ++c) cells[c] = cells[static_cast<std::size_t>(h - 1) * w + c] = 1;
    for (int r = 0; r < h; ++r) cells[static_cast<std::size_t>(r) * w] = cells[static_cast<std::size_t>(r) * w + w - 1] = 1;
    return {w, h, resolution, std::move(cells)};
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width_ && row < height_; }
  bool occupied_cell(int col, int row) const {
    return !in_bounds(col, row) || cells_[static_cast<std::size_t>(row) * width_ + col] != 0;
  }
  void set_occupied(int col, int row, bool occ) {
    if (in_bounds(col, row)) cells_[static_cast<std::size_t>(row) * width_ + col] = occ ? 1 : 0;
  }

  Cell cell_of(const Vec2& p) const {
    return {static_cast<int>(std::floor(p.x() / resolution_)),
            static_cast<int>(std::floor(p.y() / resolution_))};
  }
  Vec2 center_of(Cell c) const { return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_}; }
  bool occupied_at(const Vec2& p) const {
    const Cell c = cell_of(p);
    return occupied_cell(c.col, c.row);
  }

  /// Whether a disc of `radius` centered at p overlaps any occupied cell.
  bool disc_collides(const Vec2& p, double radius) const {
    const int c0 = static_cast<int>(std::floor((p.x() - radius) / resolution_));
    const int c1 = static_cast<int>(std::floor((p.x() + radius) / resolution_));
    const int r0 = static_cast<int>(std::floor((p.y() - radius) / resolution_));
    const int r1 = static_cast<int>(std::floor((p.y() + radius) / resolution_));
    const double r2 = radius * radius;
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (!occupied_cell(c, r)) continue;
        const double dx = std::max({c * resolution_ - p.x(), 0.0, p.x() - (c + 1) * resolution_});
        const double dz = std::max({r * resolution_ - p.y(), 0.0, p.y() - (r + 1) * resolution_});
        if (dx * dx + dz * dz < r2) return true;
      }
    }
    return false;
  }

  /// Whether the disc collides anywhere along the straight segment a -> b.
  bool swept_disc_collides(const Vec2& a, const Vec2& b, double radius) const {
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * resolution_))));
    for (int i = 0; i <= n; ++i)
      if (disc_collides(a + (b - a) * (static_cast<double>(i) / n), radius)) return true;
    return false;
  }

  /// Distance from p along unit direction dir to the first occupied cell,
  /// or max_dist if nothing is hit earlier (grid traversal).
  double raycast(const Vec2& p, const Vec2& dir, double max_dist) const {
    Cell cell = cell_of(p);
    if (occupied_cell(cell.col, cell.row)) return 0.0;
    const int step_c = dir.x() > 0 ? 1 : -1;
    const int step_r = dir.y() > 0 ? 1 : -1;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double next_x = (cell.col + (step_c > 0 ? 1 : 0)) * resolution_;
    const double next_z = (cell.row + (step_r > 0 ? 1 : 0)) * resolution_;
    double t_max_x = dir.x() != 0.0 ? (next_x - p.x()) / dir.x() : inf;
    double t_max_z = dir.y() != 0.0 ? (next_z - p.y()) / dir.y() : inf;
    const double t_dx = dir.x() != 0.0 ? resolution_ / std::abs(dir.x()) : inf;
    const double t_dz = dir.y() != 0.0 ? resolution_ / std::abs(dir.y()) : inf;
    while (true) {
      double t;
      if (t_max_x < t_max_z) {
        t = t_max_x;
        cell.col += step_c;
        t_max_x += t_dx;
      } else {
        t = t_max_z;
        cell.row += step_r;
        t_max_z += t_dz;
      }
      if (t >= max_dist) return max_dist;
      if (occupied_cell(cell.col, cell.row)) return t;
    }
  }

  std::size_t free_cell_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 0));
  }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.05;
  std::vector<std::uint8_t> cells_;
};

// Scene text format: header "GRID1 width height resolution_m", then `height`
// lines of `width` characters, '#' occupied and '.' free.

inline std::string encode_grid(const OccupancyGrid& g) {
  std::ostringstream out;
  out << "GRID1 " << g.width() << " " << g.height() << " " << g.resolution() << "\n";
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c) out << (g.occupied_cell(c, r) ? '#' : '.');
    out << "\n";
  }
  return out.str();
}

inline OccupancyGrid decode_grid(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int w = 0, h = 0;
  double res = 0;
  if (!(in >> magic) || magic != "GRID1") throw UsageError("bad scene magic (expected GRID1)");
  if (!(in >> w >> h >> res) || w <= 0 || h <= 0) throw UsageError("bad scene header");
  std::string line;
  std::getline(in, line);
  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(w) * h);
  for (int r = 0; r < h; ++r) {
    if (!std::getline(in, line)) throw UsageError("scene has fewer rows than declared");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != w) throw UsageError("scene row " + std::to_string(r) + " has wrong width");
    for (char ch : line) {
      if (ch == '#') cells.push_back(1);
      else if (ch == '.') cells.push_back(0);
      else throw UsageError(std::string("bad scene character '") + ch + "'");
    }
  }
  return {w, h, res, std::move(cells)};
}

struct SceneOptions {
  double min_size_m = 8.0;
  double max_size_m = 14.0;
  double resolution = 0.05;
  int min_obstacles = 6;
  int max_obstacles = 14;
};

/// Random indoor layout: an outer room split by interior walls with doorways,
/// plus rectangular furniture blocks.
inline OccupancyGrid random_scene(std::uint64_t seed, const SceneOptions& opt = {}) {
  Rng rng(seed);
  const double wm = uniform(rng, opt.min_size_m, opt.max_size_m);
  const double hm = uniform(rng, opt.min_size_m, opt.max_size_m);
  OccupancyGrid g = OccupancyGrid::empty_room(wm, hm, opt.resolution);
  const double res = opt.resolution;
  auto fill_rect = [&](double x0, double z0, double x1, double z1) {
    for (int r = static_cast<int>(z0 / res); r <= static_cast<int>(z1 / res); ++r)
      for (int c = static_cast<int>(x0 / res); c <= static_cast<int>(x1 / res); ++c) g.set_occupied(c, r, true);
  };
  auto clear_rect = [&](double x0, double z0, double x1, double z1) {
    for (int r = static_cast<int>(z0 / res); r <= static_cast<int>(z1 / res); ++r)
      for (int c = static_cast<int>(x0 / res); c <= static_cast<int>(x1 / res); ++c)
        if (r > 0 && c > 0 && r < g.height() - 1 && c < g.width() - 1) g.set_occupied(c, r, false);
  };
  const double thick = 0.15;
  // one vertical and one horizontal partition, each with two doorways
  const double px = uniform(rng, 0.35, 0.65) * wm;
  fill_rect(px, 0.0, px + thick, hm);
  for (int k = 0; k < 2; ++k) {
    const double dz = uniform(rng, 0.6, hm - 1.6);
    clear_rect(px - 0.05, dz, px + thick + 0.05, dz + 1.0);
  }
  const double pz = uniform(rng, 0.35, 0.65) * hm;
  fill_rect(0.0, pz, wm, pz + thick);
  for (int k = 0; k < 2; ++k) {
    const double dx = uniform(rng, 0.6, wm - 1.6);
    clear_rect(dx, pz - 0.05, dx + 1.0, pz + thick + 0.05);
  }
  std::uniform_int_distribution<int> n_obs(opt.min_obstacles, opt.max_obstacles);
  const int count = n_obs(rng);
  for (int k = 0; k < count; ++k) {
    const double sx = uniform(rng, 0.3, 1.2), sz = uniform(rng, 0.3, 1.2);
    const double x0 = uniform(rng, 0.3, wm - sx - 0.3), z0 = uniform(rng, 0.3, hm - sz - 0.3);
    fill_rect(x0, z0, x0 + sx, z0 + sz);
  }
  return g;
}

}  // namespace pgvo
