#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "pgvo/action.hpp"
#include "pgvo/camera.hpp"
#include "pgvo/correspondences.hpp"
#include "pgvo/depth.hpp"
#include "pgvo/error.hpp"
#include "pgvo/grid.hpp"
#include "pgvo/planner.hpp"
#include "pgvo/random.hpp"
#include "pgvo/se2.hpp"
#include "pgvo/vo_classical.hpp"

namespace pgvo {

inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Agent pose in the scene. The world pose maps agent-frame coordinates
/// (x left, z back) to grid coordinates.
struct AgentState {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;

  Se2 pose() const { return {heading, position}; }
  static AgentState from_pose(const Se2& p) { return {p.xi(), p.theta()}; }
};

/// Gaussian motion for one action in the agent frame.
struct MotionNoise {
  Vec2 trans_mean = Vec2::Zero();
  Vec2 trans_sigma = Vec2::Zero();
  double rot_mean = 0.0;
  double rot_sigma = 0.0;
};

struct ActuationNoiseModel {
  MotionNoise forward{{0.0, -kForwardStep}, {0.005, 0.02}, 0.0, deg2rad(1.0)};
  MotionNoise left{{0.0, 0.0}, {0.005, 0.005}, kTurnAngle, deg2rad(1.5)};
  MotionNoise right{{0.0, 0.0}, {0.005, 0.005}, -kTurnAngle, deg2rad(1.5)};
  /// On collision the translation is dropped entirely (agent stuck). When
  /// false the agent advances to the last collision-free point instead.
  bool zero_translation_on_collision = true;

  static ActuationNoiseModel noiseless() {
    ActuationNoiseModel m;
    m.forward.trans_sigma = m.left.trans_sigma = m.right.trans_sigma = Vec2::Zero();
    m.forward.rot_sigma = m.left.rot_sigma = m.right.rot_sigma = 0.0;
    return m;
  }

  const MotionNoise& for_action(Action a) const {
    switch (a) {
      case Action::move_forward: return forward;
      case Action::turn_left: return left;
      case Action::turn_right: return right;
      default: throw UsageError("no actuation model for action " + to_string(a));
    }
  }

  void validate() const {
    for (const MotionNoise* m : {&forward, &left, &right})
      if (m->trans_sigma.x() < 0 || m->trans_sigma.y() < 0 || m->rot_sigma < 0)
        throw UsageError("noise sigmas must be non-negative");
  }
};

struct StepResult {
  AgentState state;
  Se2 gt;  // realized motion: pose of the new frame in the old frame
  bool collided = false;
};

inline void check_state(const AgentState& s, const OccupancyGrid& grid) {
  if (!std::isfinite(s.position.x()) || !std::isfinite(s.position.y()) || !std::isfinite(s.heading))
    throw UsageError("agent state is not finite");
  if (grid.disc_collides(s.position, kAgentRadius)) throw UsageError("agent state overlaps an obstacle");
}

inline Se2 sample_motion(Action a, const ActuationNoiseModel& noise, Rng& rng) {
  if (a == Action::stop) return Se2::identity();
  const MotionNoise& m = noise.for_action(a);
  const double theta = gaussian(rng, m.rot_mean, m.rot_sigma);
  const double x = gaussian(rng, m.trans_mean.x(), m.trans_sigma.x());
  const double z = gaussian(rng, m.trans_mean.y(), m.trans_sigma.y());
  return {theta, x, z};
}

inline StepResult step(const AgentState& s, Action a, const OccupancyGrid& grid,
                       const ActuationNoiseModel& noise, Rng& rng) {
  if (!is_valid(a)) throw UsageError("unknown action " + std::to_string(static_cast<int>(a)));
  check_state(s, grid);
  const Se2 intended = sample_motion(a, noise, rng);
  const Se2 p0 = s.pose();
  Se2 realized = intended;
  bool collided = false;
  const Vec2 target = p0.apply(intended.xi());
  if (intended.xi().squaredNorm() > 0.0 &&
      grid.swept_disc_collides(s.position, target, kAgentRadius)) {
    collided = true;
    Vec2 xi = Vec2::Zero();
    if (!noise.zero_translation_on_collision) {
      const int n = 64;
      for (int i = n - 1; i > 0; --i) {
        const Vec2 cand = intended.xi() * (static_cast<double>(i) / n);
        if (!grid.swept_disc_collides(s.position, p0.apply(cand), kAgentRadius)) {
          xi = cand;
          break;
        }
      }
    }
    realized = Se2(intended.theta(), xi);
  }
  return {AgentState::from_pose(p0 * realized), realized, collided};
}

inline StepResult step(const AgentState& s, Action a, const OccupancyGrid& grid,
                       const ActuationNoiseModel& noise, std::uint64_t seed) {
  Rng rng(seed);
  return step(s, a, grid, noise, rng);
}

// ---------------------------------------------------------------------------
// Depth rendering

/// Depth sensor mounted at the agent center looking along -z.
struct SensorConfig {
  CameraIntrinsics cam = intrinsics_from_fov(90.0, 64, 48);
  double z_min = 0.1;
  double z_max = 10.0;
  double camera_height = 0.88;
  double ceiling_height = 2.5;
  double depth_noise_sigma = 0.0;  // additive, meters
  int landmarks = 200;             // candidate pixels per correspondence set

  void validate() const {
    if (!(z_min >= 0.0 && z_min < z_max)) throw UsageError("sensor range requires 0 <= z_min < z_max");
    if (!(camera_height > 0.0 && camera_height < ceiling_height))
      throw UsageError("camera height must lie between floor and ceiling");
    if (depth_noise_sigma < 0.0) throw UsageError("depth noise sigma must be non-negative");
    if (landmarks < 0) throw UsageError("landmark count must be non-negative");
  }
};

namespace detail {

/// World direction of the horizontal ray through normalized image x = a.
inline Vec2 column_direction(const AgentState& s, double a) {
  return rotation2(s.heading) * Vec2(-a, -1.0).normalized();
}

inline double wall_depth(const OccupancyGrid& grid, const AgentState& s, double a, double z_max) {
  const double stretch = std::sqrt(1.0 + a * a);
  return grid.raycast(s.position, column_direction(s, a), z_max * stretch + 1.0) / stretch;
}

inline double plane_depth(const SensorConfig& sensor, double b) {
  if (b > 0.0) return sensor.camera_height / b;
  if (b < 0.0) return (sensor.ceiling_height - sensor.camera_height) / -b;
  return std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Noise-free z-depth of the scene surface seen through image point (u, v);
/// may exceed z_max.
inline double scene_depth(const OccupancyGrid& grid, const AgentState& s, const SensorConfig& sensor,
                          double u, double v) {
  const Vec3 r = sensor.cam.ray(u, v);
  return std::min(detail::wall_depth(grid, s, r.x(), sensor.z_max), detail::plane_depth(sensor, r.y()));
}

/// 2.5D render: one grid ray per column, floor and ceiling planes per row.
/// Depths are clamped to [z_min, z_max].
inline DepthImage render_depth(const OccupancyGrid& grid, const AgentState& s, const SensorConfig& sensor,
                               std::uint64_t noise_seed = 0) {
  const auto& cam = sensor.cam;
  DepthImage img(cam.width, cam.height, sensor.z_min, sensor.z_max, static_cast<float>(sensor.z_max));
  Rng rng(noise_seed);
  for (int u = 0; u < cam.width; ++u) {
    const double a = cam.ray(u + 0.5, 0.0).x();
    const double wall = detail::wall_depth(grid, s, a, sensor.z_max);
    for (int v = 0; v < cam.height; ++v) {
      double d = std::min(wall, detail::plane_depth(sensor, cam.ray(0.0, v + 0.5).y()));
      d = std::min(d, sensor.z_max);
      if (sensor.depth_noise_sigma > 0.0 && d < sensor.z_max) d += gaussian(rng, 0.0, sensor.depth_noise_sigma);
      img.set(u, v, d);
    }
  }
  return img;
}

/// Exact correspondences between the view from `s` and the view after the
/// relative motion `motion`: random image points with a surface return are
/// lifted to 3D, moved into the second camera and kept if still visible.
inline Correspondences landmark_correspondences(const OccupancyGrid& grid, const AgentState& s,
                                                const Se2& motion, const SensorConfig& sensor, Rng& rng) {
  const auto& cam = sensor.cam;
  const AgentState s2 = AgentState::from_pose(s.pose() * motion);
  const CameraMotion cm = camera_motion_from_planar(motion);
  Correspondences out;
  for (int k = 0; k < sensor.landmarks; ++k) {
    const double u = uniform(rng, 0.0, cam.width), v = uniform(rng, 0.0, cam.height);
    const double d = scene_depth(grid, s, sensor, u, v);
    if (!(d > sensor.z_min && d < sensor.z_max)) continue;
    const Vec3 p = cam.ray(u, v) * d;
    const Vec3 q = cm.R * p + cm.t;
    if (!(q.z() > sensor.z_min && q.z() < sensor.z_max)) continue;
    const Eigen::Vector2d uv2 = cam.project(q);
    if (!cam.contains(uv2)) continue;
    const double d2 = scene_depth(grid, s2, sensor, uv2.x(), uv2.y());
    if (std::abs(d2 - q.z()) > 1e-6 * (1.0 + q.z())) continue;  // occluded
    Correspondence c{Eigen::Vector2d(u, v), uv2, d, q.z()};
    if (sensor.depth_noise_sigma > 0.0) {
      c.depth = std::max(sensor.z_min, c.depth + gaussian(rng, 0.0, sensor.depth_noise_sigma));
      c.depth2 = std::max(sensor.z_min, c.depth2 + gaussian(rng, 0.0, sensor.depth_noise_sigma));
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace pgvo
