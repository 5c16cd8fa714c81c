#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgvo/action.hpp"
#include "pgvo/dataset.hpp"
#include "pgvo/error.hpp"
#include "pgvo/metrics.hpp"
#include "pgvo/planner.hpp"
#include "pgvo/random.hpp"
#include "pgvo/sim.hpp"
#include "pgvo/vo_classical.hpp"

namespace pgvo {

/// Everything an estimator may look at for one executed step.
struct StepContext {
  Action action = Action::move_forward;
  const OccupancyGrid* grid = nullptr;
  AgentState before;
  Se2 gt;  // only the ground-truth estimator should read this
  const SensorConfig* sensor = nullptr;
  std::uint64_t seed = 0;  // observation noise and landmark sampling
};

/// Maps the goal estimate in the current agent frame to an action.
using Policy = std::function<Action(const Vec2& goal_estimate)>;
/// Estimated relative motion (pose of frame t+1 in frame t).
using Estimator = std::function<Se2(const StepContext&)>;

/// Turns toward the goal while its bearing exceeds `turn_threshold`, otherwise
/// moves forward; stops once the estimated goal is within `stop_radius`.
inline Policy greedy_policy(double turn_threshold = deg2rad(15.0), double stop_radius = 0.2) {
  return [=](const Vec2& g) {
    if (g.norm() < stop_radius) return Action::stop;
    const double b = goal_bearing(g);
    if (std::abs(b) > turn_threshold) return turn_toward(b);
    return Action::move_forward;
  };
}

inline Estimator gt_estimator() {
  return [](const StepContext& c) { return c.gt; };
}

inline Estimator zero_estimator() {
  return [](const StepContext&) { return Se2::identity(); };
}

/// Feature-matching VO on simulator correspondences. Falls back to the
/// action's nominal motion when the geometry is unusable.
inline Estimator classical_estimator(VoOptions vo = {}) {
  return [vo](const StepContext& c) mutable {
    Rng rng(c.seed);
    const auto corr = landmark_correspondences(*c.grid, c.before, c.gt, *c.sensor, rng);
    VoOptions o = vo;
    o.seed = c.seed;
    try {
      return planar_vo(corr, c.sensor->cam, o).to_se2();
    } catch (const DomainError&) {
      return nominal_motion(c.action);
    }
  };
}

struct EpisodeStep {
  Action action;
  Se2 gt;
  Se2 est;
  Se2 pose_est;  // dead-reckoned pose in the start frame
  Se2 pose_gt;   // true pose in the start frame
  Vec2 goal_est;
  bool collided;
};

struct Episode {
  std::string scene;
  AgentState start;
  Vec2 goal = Vec2::Zero();  // world frame
  std::vector<EpisodeStep> steps;
  AgentState final_state;
  bool stopped = false;
  NavMetrics metrics;
};

struct EpisodeOptions {
  int max_steps = 500;
  ActuationNoiseModel noise;
  SensorConfig sensor;
  double success_distance = kSuccessDistance;
};

/// Navigation loop with dead reckoning: the policy sees the goal estimate,
/// which starts at the true relative goal and is then moved by the inverse of
/// each estimated step.
inline Episode run_episode(const OccupancyGrid& grid, const NavGrid& nav, const AgentState& start, const Vec2& goal,
                           const Policy& policy, const Estimator& estimator, const EpisodeOptions& opt,
                           std::uint64_t seed) {
  if (opt.max_steps < 0) throw UsageError("max_steps must be non-negative");
  check_state(start, grid);
  const double d_init = geodesic_distance(nav, start.position, goal);

  Episode ep;
  ep.start = start;
  ep.goal = goal;
  Rng rng(seed);
  AgentState state = start;
  Vec2 goal_est = start.pose().inverse().apply(goal);
  Se2 pose_est, pose_gt;
  double path_length = 0.0;
  for (int t = 0; t < opt.max_steps; ++t) {
    const Action a = policy(goal_est);
    if (!is_valid(a)) throw UsageError("policy emitted unknown action " + std::to_string(static_cast<int>(a)));
    if (a == Action::stop) {
      ep.stopped = true;
      break;
    }
    const StepResult r = step(state, a, grid, opt.noise, rng);
    const StepContext ctx{a, &grid, state, r.gt, &opt.sensor, derive_seed(seed ^ 0x5eedf00dULL, static_cast<std::uint64_t>(t))};
    const Se2 est = estimator(ctx);
    goal_est = update_goal(goal_est, est.inverse());
    pose_est = pose_est * est;
    pose_gt = pose_gt * r.gt;
    path_length += r.gt.xi().norm();
    ep.steps.push_back({a, r.gt, est, pose_est, pose_gt, goal_est, r.collided});
    state = r.state;
  }
  ep.final_state = state;
  const double d_g = geodesic_distance(nav, state.position, goal);
  ep.metrics = nav_metrics(d_init, d_g, d_init, path_length, ep.stopped, opt.success_distance);
  return ep;
}

/// Start/goal pair in a scene with the given geodesic distance range.
struct EpisodeTask {
  AgentState start;
  Vec2 goal = Vec2::Zero();
};

inline EpisodeTask sample_episode(const SceneNav& scene, double min_dist, double max_dist, std::uint64_t seed) {
  const auto& cells = scene.navigable_cells();
  if (cells.size() < 2) throw DomainError("scene has no free space");
  const auto& nav = scene.placement();
  const auto& grid = scene.grid();
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  for (int attempt = 0; attempt < 256; ++attempt) {
    const Vec2 a = grid.center_of(cells[pick(rng)]);
    const Vec2 b = grid.center_of(cells[pick(rng)]);
    if (nav.component(grid.cell_of(a)) != nav.component(grid.cell_of(b))) continue;
    const double d = geodesic_distance(nav, a, b);
    if (d < min_dist || d > max_dist) continue;
    return {{a, normalize_angle(uniform(rng, -std::numbers::pi, std::numbers::pi))}, b};
  }
  throw DomainError("could not sample an episode");
}

}  // namespace pgvo
