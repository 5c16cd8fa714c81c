#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pgvo/action.hpp"
#include "pgvo/depth.hpp"
#include "pgvo/error.hpp"
#include "pgvo/losses.hpp"
#include "pgvo/parallel.hpp"
#include "pgvo/planner.hpp"
#include "pgvo/random.hpp"
#include "pgvo/sim.hpp"

namespace pgvo {

struct Observation {
  DepthImage depth_t;
  DepthImage depth_t1;
  Correspondences correspondences;
};

/// One training pair. `before` is the agent state at I_t; the state at
/// I_t+1 is before.pose() * gt.
struct VoSample {
  std::string id;
  std::size_t scene = 0;
  AgentState before;
  Action action = Action::move_forward;
  Se2Params gt;
  bool collided = false;
  std::optional<Observation> obs;

  AgentState after() const { return AgentState::from_pose(before.pose() * gt.to_se2()); }
};

struct FollowerOptions {
  // Planning clearance relative to the agent radius. Slightly negative so the
  // follower grazes corners and narrow gaps and gets stuck now and then.
  double margin = -0.02;
  double turn_threshold = deg2rad(15.0);
  double stop_radius = 0.2;
  double lookahead = 4.0;
  int max_steps = 500;
  int max_collisions = 10;  // per trajectory
};

struct DatasetOptions {
  std::size_t n_samples = 1000;
  ActuationNoiseModel noise;
  SensorConfig sensor;
  FollowerOptions follower;
  double min_goal_distance = 1.5;
  double max_goal_distance = 12.0;
  bool render = true;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct DatasetStats {
  std::array<std::size_t, 3> action_counts{};
  std::size_t collisions = 0;
  std::size_t trajectories = 0;
  std::size_t total = 0;

  double collision_rate() const { return total ? static_cast<double>(collisions) / total : 0.0; }
  double action_fraction(Action a) const {
    return total ? static_cast<double>(action_counts[action_index(a)]) / total : 0.0;
  }
};

inline DatasetStats dataset_stats(const std::vector<VoSample>& samples) {
  DatasetStats s;
  for (const auto& v : samples) {
    ++s.action_counts[action_index(v.action)];
    if (v.collided) ++s.collisions;
  }
  s.total = samples.size();
  return s;
}

/// Scene plus the navigation structures the follower needs. Starts and goals
/// are placed where the agent fits; the follower plans with its own
/// clearance, which may be tighter or looser than the agent radius.
class SceneNav {
 public:
  SceneNav(const OccupancyGrid& grid, double planning_clearance)
      : grid_(std::make_unique<OccupancyGrid>(grid)),
        placement_(std::make_unique<NavGrid>(*grid_, kAgentRadius)),
        planning_(std::make_unique<NavGrid>(*grid_, planning_clearance)) {
    for (std::size_t i = 0; i < grid_->cells().size(); ++i) {
      const Cell c = planning_->cell_at(i);
      if (placement_->free(c) && planning_->free(c) && planning_->component(c) == planning_->largest_component())
        cells_.push_back(c);
    }
  }

  const OccupancyGrid& grid() const { return *grid_; }
  const NavGrid& nav() const { return *planning_; }
  const NavGrid& placement() const { return *placement_; }
  const std::vector<Cell>& navigable_cells() const { return cells_; }

 private:
  std::unique_ptr<OccupancyGrid> grid_;
  std::unique_ptr<NavGrid> placement_;
  std::unique_ptr<NavGrid> planning_;
  std::vector<Cell> cells_;
};

struct TrajectoryStep {
  AgentState before;
  Action action;
  Se2 gt;
  bool collided;
};

struct Trajectory {
  std::size_t scene = 0;
  AgentState start;
  Vec2 goal = Vec2::Zero();
  std::vector<TrajectoryStep> steps;
};

/// Bearing of a goal vector given in the agent frame; positive is to the left.
inline double goal_bearing(const Vec2& local) { return std::atan2(local.x(), -local.y()); }

inline Action turn_toward(double bearing) { return bearing >= 0.0 ? Action::turn_left : Action::turn_right; }

/// Samples a start and goal in one scene and drives the agent along the
/// shortest path with ground-truth localization and noisy actuation.
inline Trajectory follow_shortest_path(const SceneNav& scene, std::size_t scene_index, std::uint64_t seed,
                                       const DatasetOptions& opt) {
  const auto& cells = scene.navigable_cells();
  if (cells.size() < 2) throw DomainError("scene has no free space");
  const auto& nav = scene.nav();
  const auto& grid = scene.grid();
  const FollowerOptions& fo = opt.follower;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);

  Trajectory traj;
  traj.scene = scene_index;
  std::vector<double> field;
  bool found = false;
  for (int attempt = 0; attempt < 64 && !found; ++attempt) {
    traj.goal = grid.center_of(cells[pick(rng)]);
    field = distance_field(nav, traj.goal);
    for (int k = 0; k < 32; ++k) {
      const Cell c = cells[pick(rng)];
      const double d = field[nav.index(c)];
      if (d >= opt.min_goal_distance && d <= opt.max_goal_distance) {
        traj.start = {grid.center_of(c), normalize_angle(uniform(rng, -std::numbers::pi, std::numbers::pi))};
        found = true;
        break;
      }
    }
  }
  if (!found) throw DomainError("could not sample a start/goal pair");

  AgentState state = traj.start;
  int collisions = 0;
  bool recovering = false;
  for (int t = 0; t < fo.max_steps; ++t) {
    if ((traj.goal - state.position).norm() < fo.stop_radius) break;
    const Vec2 wp = next_waypoint(nav, field, state.position, traj.goal, fo.lookahead);
    const double bearing = goal_bearing(state.pose().inverse().apply(wp));
    Action a = std::abs(bearing) > fo.turn_threshold ? turn_toward(bearing) : Action::move_forward;
    if (recovering && a == Action::move_forward) a = turn_toward(bearing);
    recovering = false;
    const StepResult r = step(state, a, grid, opt.noise, rng);
    traj.steps.push_back({state, a, r.gt, r.collided});
    state = r.state;
    if (r.collided) {
      recovering = true;
      if (++collisions >= fo.max_collisions) break;
    }
  }
  return traj;
}

inline Observation render_observation(const OccupancyGrid& grid, const AgentState& before, const Se2& motion,
                                      const SensorConfig& sensor, std::uint64_t seed) {
  Rng rng(seed);
  const AgentState after = AgentState::from_pose(before.pose() * motion);
  const std::uint64_t s0 = rng(), s1 = rng();
  return {render_depth(grid, before, sensor, s0), render_depth(grid, after, sensor, s1),
          landmark_correspondences(grid, before, motion, sensor, rng)};
}

inline std::string sample_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%07zu", i);
  return buf;
}

/// Navigation structures for every scene, planned with the follower clearance.
inline std::vector<std::unique_ptr<SceneNav>> build_scene_navs(const std::vector<OccupancyGrid>& scenes,
                                                              double clearance) {
  std::vector<std::unique_ptr<SceneNav>> navs;
  for (const auto& g : scenes) navs.push_back(std::make_unique<SceneNav>(g, clearance));
  return navs;
}

struct GeneratedDataset {
  std::vector<VoSample> samples;
  DatasetStats stats;
};

/// (1) sample start and goal, (2) follow the shortest path with noisy
/// actuation, (3) keep every movement step as a sample, until n_samples are
/// collected. Trajectory i uses the stream derive_seed(seed, i), so the
/// result does not depend on `jobs`.
inline GeneratedDataset generate_vo_dataset(const std::vector<OccupancyGrid>& scenes, const DatasetOptions& opt) {
  if (opt.n_samples < 1) throw UsageError("n_samples must be >= 1");
  if (scenes.empty()) throw UsageError("at least one scene is required");
  opt.noise.validate();
  opt.sensor.validate();
  const auto navs = build_scene_navs(scenes, kAgentRadius + opt.follower.margin);
  for (const auto& n : navs)
    if (n->navigable_cells().size() < 2) throw DomainError("scene has no free space");

  GeneratedDataset out;
  const std::size_t chunk = std::max<std::size_t>(8, 4 * static_cast<std::size_t>(std::max(1u, opt.jobs)));
  std::size_t next_traj = 0;
  while (out.samples.size() < opt.n_samples) {
    std::vector<Trajectory> batch(chunk);
    parallel_for(chunk, opt.jobs, [&](std::size_t k) {
      const std::uint64_t s = derive_seed(opt.seed, next_traj + k);
      const std::size_t scene = static_cast<std::size_t>(splitmix64(s) % scenes.size());
      batch[k] = follow_shortest_path(*navs[scene], scene, s, opt);
    });
    next_traj += chunk;
    for (const auto& traj : batch) {
      if (out.samples.size() >= opt.n_samples) break;
      ++out.stats.trajectories;
      for (const auto& st : traj.steps) {
        if (out.samples.size() >= opt.n_samples) break;
        VoSample v;
        v.id = sample_id(out.samples.size());
        v.scene = traj.scene;
        v.before = st.before;
        v.action = st.action;
        v.gt = Se2Params::from(st.gt);
        v.collided = st.collided;
        out.samples.push_back(std::move(v));
      }
    }
    if (next_traj > 64 * opt.n_samples + 1024) throw DomainError("trajectories produce no samples");
  }

  if (opt.render) {
    parallel_for(out.samples.size(), opt.jobs, [&](std::size_t i) {
      auto& v = out.samples[i];
      v.obs = render_observation(scenes[v.scene], v.before, v.gt.to_se2(), opt.sensor,
                                 derive_seed(opt.seed ^ 0x0b5e7a7e0b5e7a7eULL, i));
    });
  }
  const auto trajectories = out.stats.trajectories;
  out.stats = dataset_stats(out.samples);
  out.stats.trajectories = trajectories;
  return out;
}

inline Action mirrored_turn(Action a) {
  if (a == Action::turn_left) return Action::turn_right;
  if (a == Action::turn_right) return Action::turn_left;
  return a;
}

/// Adds, for every turn, the reversed pair labeled with the opposite turn and
/// the inverse ground truth. Forward samples are not duplicated.
inline std::vector<VoSample> augment_turn_pairs(const std::vector<VoSample>& samples) {
  std::vector<VoSample> out;
  out.reserve(samples.size() * 2);
  for (const auto& s : samples) {
    out.push_back(s);
    if (s.action != Action::turn_left && s.action != Action::turn_right) continue;
    VoSample r;
    r.id = s.id + "r";
    r.scene = s.scene;
    r.before = s.after();
    r.action = mirrored_turn(s.action);
    r.gt = Se2Params::from(inverse(s.gt.to_se2()));
    r.collided = s.collided;
    if (s.obs) r.obs = Observation{s.obs->depth_t1, s.obs->depth_t, swapped(s.obs->correspondences)};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pgvo
