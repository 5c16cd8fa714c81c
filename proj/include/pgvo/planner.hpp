#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <vector>

#include "pgvo/error.hpp"
#include "pgvo/grid.hpp"

namespace pgvo {

inline constexpr double kAgentRadius = 0.18;

/// Cells whose centers keep at least `clearance` meters from every occupied
/// cell. Planning, geodesic distances and start/goal sampling use this set.
class NavGrid {
 public:
  NavGrid(const OccupancyGrid& grid, double clearance = kAgentRadius)
      : grid_(&grid), clearance_(clearance),
        free_(static_cast<std::size_t>(grid.width()) * grid.height(), 0),
        component_(free_.size(), -1) {
    for (int r = 0; r < grid.height(); ++r)
      for (int c = 0; c < grid.width(); ++c)
        free_[index({c, r})] = grid.disc_collides(grid.center_of({c, r}), clearance) ? 0 : 1;
    label_components();
  }

  const OccupancyGrid& grid() const { return *grid_; }
  double clearance() const { return clearance_; }

  bool free(Cell c) const { return grid_->in_bounds(c.col, c.row) && free_[index(c)] != 0; }
  int component(Cell c) const { return grid_->in_bounds(c.col, c.row) ? component_[index(c)] : -1; }
  int largest_component() const { return largest_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * grid_->width() + c.col; }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % grid_->width()), static_cast<int>(i / grid_->width())};
  }

  /// Nearest free cell to p (breadth-first over cells), if any within max_rings.
  std::optional<Cell> snap(const Vec2& p, int max_rings = 40) const {
    const Cell c0 = grid_->cell_of(p);
    if (free(c0)) return c0;
    std::optional<Cell> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int ring = 1; ring <= max_rings; ++ring) {
      for (int dr = -ring; dr <= ring; ++dr) {
        for (int dc = -ring; dc <= ring; ++dc) {
          if (std::max(std::abs(dr), std::abs(dc)) != ring) continue;
          const Cell c{c0.col + dc, c0.row + dr};
          if (!free(c)) continue;
          const double d = (grid_->center_of(c) - p).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
      }
      if (best) return best;
    }
    return std::nullopt;
  }

  /// Straight segment stays inside free cells.
  bool line_of_sight(const Vec2& a, const Vec2& b) const {
    const double len = (b - a).norm();
    const int n = std::max(1, static_cast<int>(std::ceil(len / (0.25 * grid_->resolution()))));
    for (int i = 0; i <= n; ++i)
      if (!free(grid_->cell_of(a + (b - a) * (static_cast<double>(i) / n)))) return false;
    return true;
  }

 private:
  void label_components() {
    int label = 0;
    std::size_t best_size = 0;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      if (!free_[i] || component_[i] >= 0) continue;
      std::size_t size = 0;
      std::deque<std::size_t> q{i};
      component_[i] = label;
      while (!q.empty()) {
        const Cell c = cell_at(q.front());
        q.pop_front();
        ++size;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const Cell n{c.col + dc, c.row + dr};
            if (!free(n) || component_[index(n)] >= 0) continue;
            if (dr != 0 && dc != 0 && (!free({c.col + dc, c.row}) || !free({c.col, c.row + dr}))) continue;
            component_[index(n)] = label;
            q.push_back(index(n));
          }
      }
      if (size > best_size) {
        best_size = size;
        largest_ = label;
      }
      ++label;
    }
  }

  const OccupancyGrid* grid_;
  double clearance_;
  std::vector<std::uint8_t> free_;
  std::vector<int> component_;
  int largest_ = -1;
};

struct Path {
  std::vector<Vec2> points;  // start, waypoints..., goal
  double length = 0.0;
};

namespace detail {

template <class Visit>
void for_each_neighbor(const NavGrid& nav, Cell c, Visit&& visit) {
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const Cell n{c.col + dc, c.row + dr};
      if (!nav.free(n)) continue;
      // no corner cutting
      if (dr != 0 && dc != 0 && (!nav.free({c.col + dc, c.row}) || !nav.free({c.col, c.row + dr}))) continue;
      visit(n, (dr != 0 && dc != 0) ? std::numbers::sqrt2 : 1.0);
    }
}

inline Path string_pull(const NavGrid& nav, const std::vector<Vec2>& raw) {
  Path path;
  std::size_t anchor = 0;
  path.points.push_back(raw.front());
  while (anchor + 1 < raw.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t j = raw.size() - 1; j > anchor + 1; --j) {
      if (nav.line_of_sight(raw[anchor], raw[j])) {
        next = j;
        break;
      }
    }
    path.length += (raw[next] - raw[anchor]).norm();
    path.points.push_back(raw[next]);
    anchor = next;
  }
  return path;
}

}  // namespace detail

/// Shortest collision-free path for the agent from start to goal (world meters):
/// 8-connected A* over the navigable cells followed by line-of-sight smoothing.
inline Path shortest_path(const NavGrid& nav, const Vec2& start, const Vec2& goal) {
  const auto s = nav.snap(start);
  const auto g = nav.snap(goal);
  if (!s || !g || nav.component(*s) != nav.component(*g)) throw DomainError("no path");
  const auto& grid = nav.grid();

  if (nav.line_of_sight(start, goal) && nav.free(grid.cell_of(start)) && nav.free(grid.cell_of(goal)))
    return {{start, goal}, (goal - start).norm()};

  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  const Vec2 goal_center = grid.center_of(*g);
  auto heuristic = [&](Cell c) { return (grid.center_of(c) - goal_center).norm() / grid.resolution(); };
  cost[nav.index(*s)] = 0.0;
  open.emplace(heuristic(*s), nav.index(*s));
  const std::size_t target = nav.index(*g);
  while (!open.empty()) {
    const auto [f, i] = open.top();
    open.pop();
    if (i == target) break;
    const Cell c = nav.cell_at(i);
    if (f - heuristic(c) > cost[i] + 1e-9) continue;
    detail::for_each_neighbor(nav, c, [&](Cell nb, double step) {
      const std::size_t j = nav.index(nb);
      const double nc = cost[i] + step;
      if (nc < cost[j]) {
        cost[j] = nc;
        parent[j] = i;
        open.emplace(nc + heuristic(nb), j);
      }
    });
  }
  if (parent[target] == n && target != nav.index(*s)) throw DomainError("no path");

  std::vector<Vec2> raw{goal};
  for (std::size_t i = target; i != n; i = parent[i]) raw.push_back(grid.center_of(nav.cell_at(i)));
  raw.push_back(start);
  std::reverse(raw.begin(), raw.end());
  return detail::string_pull(nav, raw);
}

inline double geodesic_distance(const NavGrid& nav, const Vec2& a, const Vec2& b) {
  return shortest_path(nav, a, b).length;
}

/// Grid geodesic distance (meters) from every navigable cell to `goal`;
/// infinity where unreachable.
inline std::vector<double> distance_field(const NavGrid& nav, const Vec2& goal) {
  const auto& grid = nav.grid();
  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  const auto g = nav.snap(goal);
  if (!g) throw DomainError("no path");
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[nav.index(*g)] = (grid.center_of(*g) - goal).norm();
  open.emplace(dist[nav.index(*g)], nav.index(*g));
  while (!open.empty()) {
    const auto [d, i] = open.top();
    open.pop();
    if (d > dist[i]) continue;
    detail::for_each_neighbor(nav, nav.cell_at(i), [&](Cell nb, double step) {
      const std::size_t j = nav.index(nb);
      const double nd = d + step * grid.resolution();
      if (nd < dist[j]) {
        dist[j] = nd;
        open.emplace(nd, j);
      }
    });
  }
  return dist;
}

/// Next waypoint toward the goal from p: the farthest point along the
/// steepest-descent chain of `field` still in line of sight.
inline Vec2 next_waypoint(const NavGrid& nav, const std::vector<double>& field, const Vec2& p,
                          const Vec2& goal, double max_lookahead = 4.0) {
  const auto& grid = nav.grid();
  if (nav.line_of_sight(p, goal) && (goal - p).norm() <= max_lookahead) return goal;
  auto start = nav.snap(p);
  if (!start) return goal;
  std::vector<Vec2> chain;
  Cell c = *start;
  double travelled = 0.0;
  while (travelled < max_lookahead) {
    chain.push_back(grid.center_of(c));
    double best = field[nav.index(c)];
    Cell next = c;
    detail::for_each_neighbor(nav, c, [&](Cell nb, double) {
      if (field[nav.index(nb)] < best) {
        best = field[nav.index(nb)];
        next = nb;
      }
    });
    if (next == c) {
      chain.push_back(goal);
      break;
    }
    travelled += (grid.center_of(next) - grid.center_of(c)).norm();
    c = next;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    if (nav.line_of_sight(p, *it)) return *it;
  return chain.front();
}

}  // namespace pgvo
