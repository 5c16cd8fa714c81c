#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pgvo/dataset.hpp"
#include "pgvo/episode.hpp"
#include "pgvo/error.hpp"
#include "pgvo/losses.hpp"
#include "pgvo/sim.hpp"
#include "pgvo/trainer.hpp"
#include "pgvo/vo_classical.hpp"

namespace pgvo {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

// clang-format off
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"seed", "0", "master seed; --seed overrides"},
      {"noise.forward.x_mean", "0", "forward step lateral mean (m)"},
      {"noise.forward.z_mean", "-0.25", "forward step longitudinal mean (m), forward is -z"},
      {"noise.forward.x_sigma", "0.005", "forward step lateral sigma (m)"},
      {"noise.forward.z_sigma", "0.02", "forward step longitudinal sigma (m)"},
      {"noise.forward.theta_mean_deg", "0", "forward step heading mean (deg)"},
      {"noise.forward.theta_sigma_deg", "1", "forward step heading sigma (deg)"},
      {"noise.turn.theta_deg", "30", "turn magnitude (deg); left is +, right is -"},
      {"noise.turn.theta_sigma_deg", "1.5", "turn sigma (deg)"},
      {"noise.turn.x_sigma", "0.005", "turn translation sigma x (m)"},
      {"noise.turn.z_sigma", "0.005", "turn translation sigma z (m)"},
      {"noise.enabled", "true", "false replaces every sigma with 0"},
      {"noise.collision_zero_translation", "true", "collided steps keep no translation (else advance to contact)"},
      {"camera.hfov_deg", "90", "horizontal field of view (deg)"},
      {"camera.width", "64", "image width (px)"},
      {"camera.height", "48", "image height (px)"},
      {"camera.z_min", "0.1", "minimum depth (m)"},
      {"camera.z_max", "10", "maximum depth (m)"},
      {"camera.mount_height", "0.88", "camera height above the floor (m)"},
      {"scene.ceiling_height", "2.5", "ceiling height (m)"},
      {"sensor.depth_noise_sigma", "0", "additive Gaussian depth noise (m)"},
      {"sensor.landmarks", "200", "candidate pixels per correspondence set"},
      {"depth.bins", "10", "d-depth channels N"},
      {"projection.size", "96", "soft projection grid size (cells per side)"},
      {"features.pool_rows", "3", "feature pooling rows"},
      {"features.pool_cols", "4", "feature pooling columns"},
      {"features.projection_size", "32", "soft projection size used for features"},
      {"loss.lambda_reg", "1", "regression loss weight"},
      {"loss.lambda_inv_trans", "1", "translation invariance loss weight"},
      {"loss.lambda_inv_rot", "1", "rotation invariance loss weight"},
      {"loss.reduction", "mean", "batch reduction: sum | mean"},
      {"train.epochs", "500", "full-batch descent epochs"},
      {"train.learning_rate", "0.1", "initial step size"},
      {"train.sep_act", "false", "one head per movement action"},
      {"train.val_fraction", "0.2", "held-out fraction for the error report"},
      {"train.augment_turns", "true", "add reversed turn pairs"},
      {"dataset.min_goal_distance", "1.5", "minimum start-goal geodesic distance (m)"},
      {"dataset.max_goal_distance", "12", "maximum start-goal geodesic distance (m)"},
      {"dataset.render", "true", "write depth observations and correspondences"},
      {"follower.margin", "-0.02", "follower planning clearance minus agent radius (m)"},
      {"follower.turn_threshold_deg", "15", "follower turns when the waypoint bearing exceeds this"},
      {"follower.stop_radius", "0.2", "follower stops this close to the goal (m)"},
      {"follower.max_steps", "500", "follower step limit per trajectory"},
      {"follower.max_collisions", "10", "follower gives up after this many collisions"},
      {"episode.max_steps", "500", "navigation step limit"},
      {"episode.success_distance", "0.36", "success radius (m)"},
      {"policy.turn_threshold_deg", "15", "greedy policy turn threshold (deg)"},
      {"policy.stop_radius", "0.2", "greedy policy stops when the goal estimate is this close (m)"},
      {"vo.ransac_iterations", "200", "robust sampling iterations"},
      {"vo.inlier_threshold", "1e-3", "Sampson distance threshold (normalized coords)"},
      {"vo.low_parallax_rad", "1e-4", "median parallax below which motion is rotation only"},
      {"vo.max_out_of_plane_deg", "5", "abort above this out-of-plane rotation"},
      {"vo.scale_mode", "projection", "scale from depths: projection | norm"},
      {"vo.low_parallax_translation", "reprojection", "translation under low parallax: reprojection | zero"},
      {"metrics.clamp_soft_spl", "false", "clamp SoftSPL progress at 0"},
  };
  return keys;
}
// clang-format on

class Config {
 public:
  Config() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
  }

  /// Parses "key = value" lines; '#' starts a comment.
  static Config parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (trim(line).empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    it->second = value;
  }

  /// "key=value" as given to --set.
  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + kv + "'");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    return it->second;
  }

  double num(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("config key '" + key + "' expects a number, got '" + s + "'");
    }
  }

  int integer(const std::string& key) const {
    const std::string& s = str(key);
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw UsageError("config key '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw UsageError("config key '" + key + "' expects an unsigned integer, got '" + s + "'");
    return v;
  }

  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError("config key '" + key + "' expects true/false, got '" + s + "'");
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  std::string dump() const {
    std::string out;
    for (const auto& k : config_keys()) out += std::string(k.name) + " = " + values_.at(k.name) + "  # " + k.help + "\n";
    return out;
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }

  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Typed views

inline ActuationNoiseModel noise_model(const Config& c) {
  ActuationNoiseModel m;
  m.forward = {{c.num("noise.forward.x_mean"), c.num("noise.forward.z_mean")},
               {c.num("noise.forward.x_sigma"), c.num("noise.forward.z_sigma")},
               deg2rad(c.num("noise.forward.theta_mean_deg")),
               deg2rad(c.num("noise.forward.theta_sigma_deg"))};
  const double turn = deg2rad(c.num("noise.turn.theta_deg"));
  const double turn_sigma = deg2rad(c.num("noise.turn.theta_sigma_deg"));
  const Vec2 turn_xy{c.num("noise.turn.x_sigma"), c.num("noise.turn.z_sigma")};
  m.left = {Vec2::Zero(), turn_xy, turn, turn_sigma};
  m.right = {Vec2::Zero(), turn_xy, -turn, turn_sigma};
  if (!c.flag("noise.enabled")) {
    m.forward.trans_sigma = m.left.trans_sigma = m.right.trans_sigma = Vec2::Zero();
    m.forward.rot_sigma = m.left.rot_sigma = m.right.rot_sigma = 0.0;
  }
  m.zero_translation_on_collision = c.flag("noise.collision_zero_translation");
  m.validate();
  return m;
}

inline SensorConfig sensor_config(const Config& c) {
  SensorConfig s;
  s.cam = intrinsics_from_fov(c.num("camera.hfov_deg"), c.integer("camera.width"), c.integer("camera.height"));
  s.z_min = c.num("camera.z_min");
  s.z_max = c.num("camera.z_max");
  s.camera_height = c.num("camera.mount_height");
  s.ceiling_height = c.num("scene.ceiling_height");
  s.depth_noise_sigma = c.num("sensor.depth_noise_sigma");
  s.landmarks = c.integer("sensor.landmarks");
  s.validate();
  return s;
}

inline VoOptions vo_options(const Config& c) {
  VoOptions o;
  o.ransac_iterations = c.integer("vo.ransac_iterations");
  o.inlier_threshold = c.num("vo.inlier_threshold");
  o.low_parallax_rad = c.num("vo.low_parallax_rad");
  o.max_out_of_plane_deg = c.num("vo.max_out_of_plane_deg");
  const std::string& mode = c.str("vo.scale_mode");
  if (mode == "projection") o.scale_mode = ScaleMode::projection;
  else if (mode == "norm") o.scale_mode = ScaleMode::norm;
  else throw UsageError("vo.scale_mode must be projection or norm");
  const std::string& lp = c.str("vo.low_parallax_translation");
  if (lp == "reprojection") o.low_parallax_translation = LowParallaxTranslation::reprojection;
  else if (lp == "zero") o.low_parallax_translation = LowParallaxTranslation::zero;
  else throw UsageError("vo.low_parallax_translation must be reprojection or zero");
  if (o.ransac_iterations < 1) throw UsageError("vo.ransac_iterations must be >= 1");
  return o;
}

inline FeatureConfig feature_config(const Config& c) {
  FeatureConfig f;
  f.pool_rows = c.integer("features.pool_rows");
  f.pool_cols = c.integer("features.pool_cols");
  f.depth_bins = c.integer("depth.bins");
  f.projection_size = c.integer("features.projection_size");
  f.validate();
  return f;
}

inline LossWeights loss_weights(const Config& c) {
  LossWeights w{c.num("loss.lambda_reg"), c.num("loss.lambda_inv_trans"), c.num("loss.lambda_inv_rot")};
  w.validate();
  return w;
}

inline FitOptions fit_options(const Config& c, std::uint64_t seed) {
  FitOptions o;
  o.weights = loss_weights(c);
  o.learning_rate = c.num("train.learning_rate");
  o.epochs = c.integer("train.epochs");
  o.sep_act = c.flag("train.sep_act");
  o.seed = seed;
  const std::string& r = c.str("loss.reduction");
  if (r == "sum") o.reduction = Reduction::sum;
  else if (r == "mean") o.reduction = Reduction::mean;
  else throw UsageError("loss.reduction must be sum or mean");
  return o;
}

inline DatasetOptions dataset_options(const Config& c, std::uint64_t seed, unsigned jobs) {
  DatasetOptions o;
  o.noise = noise_model(c);
  o.sensor = sensor_config(c);
  o.follower.margin = c.num("follower.margin");
  o.follower.turn_threshold = deg2rad(c.num("follower.turn_threshold_deg"));
  o.follower.stop_radius = c.num("follower.stop_radius");
  o.follower.max_steps = c.integer("follower.max_steps");
  o.follower.max_collisions = c.integer("follower.max_collisions");
  o.min_goal_distance = c.num("dataset.min_goal_distance");
  o.max_goal_distance = c.num("dataset.max_goal_distance");
  o.render = c.flag("dataset.render");
  o.seed = seed;
  o.jobs = jobs;
  if (!(o.min_goal_distance >= 0.0 && o.min_goal_distance <= o.max_goal_distance))
    throw UsageError("dataset goal distance range is empty");
  return o;
}

inline EpisodeOptions episode_options(const Config& c) {
  EpisodeOptions o;
  o.max_steps = c.integer("episode.max_steps");
  o.noise = noise_model(c);
  o.sensor = sensor_config(c);
  o.success_distance = c.num("episode.success_distance");
  if (o.max_steps < 0) throw UsageError("episode.max_steps must be non-negative");
  return o;
}

inline Policy configured_policy(const Config& c) {
  return greedy_policy(deg2rad(c.num("policy.turn_threshold_deg")), c.num("policy.stop_radius"));
}

}  // namespace pgvo
