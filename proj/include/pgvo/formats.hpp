#pragma once

// File formats that need JSON: dataset directories, episode logs and model
// checkpoints. Depends on nlohmann/json (vendor/json.hpp).

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgvo/correspondences.hpp"
#include "pgvo/dataset.hpp"
#include "pgvo/depth_io.hpp"
#include "pgvo/episode.hpp"
#include "pgvo/error.hpp"
#include "pgvo/io.hpp"
#include "pgvo/metrics.hpp"
#include "pgvo/trainer.hpp"

namespace pgvo {

using json = nlohmann::json;

inline json se2_json(const Se2& h) { return json::array({h.theta(), h.x(), h.z()}); }
inline json se2_json(const Se2Params& p) { return json::array({p.theta, p.xi_x, p.xi_z}); }

inline Se2Params se2_params_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw UsageError("expected [theta, xi_x, xi_z]");
  return {j[1].get<double>(), j[2].get<double>(), j[0].get<double>()};
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError("malformed JSON in " + what + ": " + e.what());
  }
}

inline std::vector<json> parse_jsonl(const std::string& text, const std::string& what) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(parse_json(line, what));
  return out;
}

// ---------------------------------------------------------------------------
// Dataset directory: index.jsonl, manifest.json, obs/*.dpth, corr/*.csv

inline json sensor_json(const SensorConfig& s) {
  return {{"width", s.cam.width},   {"height", s.cam.height}, {"fx", s.cam.fx()},
          {"fy", s.cam.fy()},       {"cx", s.cam.cx()},       {"cy", s.cam.cy()},
          {"z_min", s.z_min},       {"z_max", s.z_max},       {"camera_height", s.camera_height},
          {"ceiling_height", s.ceiling_height}, {"depth_noise_sigma", s.depth_noise_sigma}};
}

inline json manifest_json(const DatasetStats& st, const DatasetOptions& opt, const std::vector<std::string>& scenes) {
  json counts, fractions;
  for (Action a : kMovementActions) {
    counts[to_string(a)] = st.action_counts[action_index(a)];
    fractions[to_string(a)] = st.action_fraction(a);
  }
  return {{"n_samples", st.total},
          {"seed", opt.seed},
          {"trajectories", st.trajectories},
          {"action_counts", counts},
          {"action_fractions", fractions},
          {"collisions", st.collisions},
          {"collision_rate", st.collision_rate()},
          {"rendered", opt.render},
          {"scenes", scenes},
          {"sensor", sensor_json(opt.sensor)}};
}

inline void write_dataset(const fs::path& dir, const GeneratedDataset& data, const DatasetOptions& opt,
                          const std::vector<std::string>& scene_names) {
  std::error_code ec;
  fs::create_directories(dir / "obs", ec);
  fs::create_directories(dir / "corr", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::string index;
  for (const auto& s : data.samples) {
    json line{{"id", s.id},
              {"scene", s.scene},
              {"action", to_string(s.action)},
              {"gt", se2_json(s.gt)},
              {"collided", s.collided},
              {"state", json::array({s.before.position.x(), s.before.position.y(), s.before.heading})}};
    if (s.obs) {
      const std::string t = "obs/" + s.id + "_t.dpth", t1 = "obs/" + s.id + "_t1.dpth", c = "corr/" + s.id + ".csv";
      save_depth(dir / t, s.obs->depth_t);
      save_depth(dir / t1, s.obs->depth_t1);
      write_file_atomic(dir / c, encode_correspondences(s.obs->correspondences));
      line["obs_t"] = t;
      line["obs_t1"] = t1;
      line["corr"] = c;
    }
    index += line.dump() + "\n";
  }
  write_file_atomic(dir / "index.jsonl", index);
  write_file_atomic(dir / "manifest.json", manifest_json(data.stats, opt, scene_names).dump(2) + "\n");
}

inline std::vector<VoSample> read_dataset(const fs::path& dir, bool load_observations = true) {
  const auto lines = parse_jsonl(read_file(dir / "index.jsonl"), (dir / "index.jsonl").string());
  std::vector<VoSample> out;
  out.reserve(lines.size());
  try {
    for (const auto& j : lines) {
      VoSample s;
      s.id = j.at("id").get<std::string>();
      s.scene = j.value("scene", std::size_t{0});
      s.action = parse_action(j.at("action").get<std::string>());
      if (!is_movement(s.action)) throw UsageError("dataset sample with non-movement action");
      s.gt = se2_params_from_json(j.at("gt"));
      s.collided = j.at("collided").get<bool>();
      if (j.contains("state")) {
        const auto& st = j["state"];
        s.before = {Vec2(st.at(0).get<double>(), st.at(1).get<double>()), st.at(2).get<double>()};
      }
      if (load_observations && j.contains("obs_t")) {
        Observation o{load_depth(dir / j["obs_t"].get<std::string>()),
                      load_depth(dir / j["obs_t1"].get<std::string>()), {}};
        if (j.contains("corr")) o.correspondences = decode_correspondences(read_file(dir / j["corr"].get<std::string>()));
        s.obs = std::move(o);
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw UsageError("malformed dataset index: " + std::string(e.what()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Episode log: one JSON object per step, then a {"summary": ...} line

inline std::string encode_episode_log(const Episode& ep) {
  std::string out;
  for (std::size_t t = 0; t < ep.steps.size(); ++t) {
    const auto& s = ep.steps[t];
    json line{{"t", t},
              {"action", to_string(s.action)},
              {"gt", se2_json(s.gt)},
              {"est", se2_json(s.est)},
              {"pose_est", se2_json(s.pose_est)},
              {"pose_gt", se2_json(s.pose_gt)},
              {"goal_est", json::array({s.goal_est.x(), s.goal_est.y()})},
              {"collided", s.collided}};
    out += line.dump() + "\n";
  }
  const auto& m = ep.metrics;
  json summary{{"scene", ep.scene},
               {"start", json::array({ep.start.position.x(), ep.start.position.y(), ep.start.heading})},
               {"goal", json::array({ep.goal.x(), ep.goal.y()})},
               {"steps", ep.steps.size()},
               {"stopped", m.stopped},
               {"success", m.success},
               {"spl", m.spl},
               {"soft_spl", m.soft_spl},
               {"d_g", m.d_g},
               {"d_init", m.d_init},
               {"path_length", m.path_length},
               {"shortest_length", m.shortest_length}};
  out += json{{"summary", summary}}.dump() + "\n";
  return out;
}

/// Metrics recomputed from the raw quantities in a log's summary line.
inline NavMetrics read_episode_summary(const std::string& text, const std::string& what,
                                       double success_distance = kSuccessDistance, bool clamp_soft_spl = false) {
  const auto lines = parse_jsonl(text, what);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    if (!it->contains("summary")) continue;
    try {
      const auto& s = (*it)["summary"];
      NavMetrics m = nav_metrics(s.at("d_init").get<double>(), s.at("d_g").get<double>(),
                                 s.at("shortest_length").get<double>(), s.at("path_length").get<double>(),
                                 s.at("stopped").get<bool>(), success_distance);
      if (clamp_soft_spl && m.d_init > 0.0)
        m.soft_spl = soft_spl(m.d_init, m.d_g, m.shortest_length, m.path_length, true);
      return m;
    } catch (const json::exception& e) {
      throw UsageError("malformed summary in " + what + ": " + e.what());
    }
  }
  throw UsageError("no summary line in " + what);
}

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Model checkpoint

inline json vec_json(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline VecX vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::string encode_checkpoint(const LinearVoModel& m) {
  json heads = json::array();
  for (std::size_t h = 0; h < m.heads.size(); ++h) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < 3; ++r) rows.push_back(vec_json(m.heads[h].W.row(r).transpose()));
    heads.push_back({{"action", m.sep_act ? to_string(kMovementActions[h]) : std::string("all")},
                     {"weight", rows},
                     {"bias", vec_json(m.heads[h].b)}});
  }
  json j{{"format", "pgvo-linear-vo-1"},
         {"features",
          {{"pool_rows", m.features.pool_rows},
           {"pool_cols", m.features.pool_cols},
           {"depth_bins", m.features.depth_bins},
           {"projection_size", m.features.projection_size}}},
         {"sep_act", m.sep_act},
         {"feature_mean", vec_json(m.feature_mean)},
         {"feature_scale", vec_json(m.feature_scale)},
         {"heads", heads},
         {"loss_weights",
          {{"lambda_reg", m.weights.lambda_reg},
           {"lambda_inv_trans", m.weights.lambda_inv_trans},
           {"lambda_inv_rot", m.weights.lambda_inv_rot}}},
         {"seed", m.seed}};
  return j.dump(1) + "\n";
}

inline LinearVoModel decode_checkpoint(const std::string& text) {
  const json j = parse_json(text, "checkpoint");
  try {
    if (j.at("format") != "pgvo-linear-vo-1") throw UsageError("unsupported checkpoint format");
    LinearVoModel m;
    const auto& f = j.at("features");
    m.features = {f.at("pool_rows").get<int>(), f.at("pool_cols").get<int>(), f.at("depth_bins").get<int>(),
                  f.at("projection_size").get<int>()};
    m.features.validate();
    m.sep_act = j.at("sep_act").get<bool>();
    m.feature_mean = vec_from_json(j.at("feature_mean"));
    m.feature_scale = vec_from_json(j.at("feature_scale"));
    const auto dim = m.feature_mean.size();
    if (m.feature_scale.size() != dim || dim != m.features.pair_dim())
      throw UsageError("checkpoint feature dimensions are inconsistent");
    for (const auto& h : j.at("heads")) {
      LinearHead head{MatX(3, dim), Eigen::Vector3d::Zero()};
      const auto& rows = h.at("weight");
      if (rows.size() != 3) throw UsageError("checkpoint weight must have 3 rows");
      for (Eigen::Index r = 0; r < 3; ++r) {
        const VecX row = vec_from_json(rows[static_cast<std::size_t>(r)]);
        if (row.size() != dim) throw UsageError("checkpoint weight row has wrong length");
        head.W.row(r) = row.transpose();
      }
      const VecX b = vec_from_json(h.at("bias"));
      if (b.size() != 3) throw UsageError("checkpoint bias must have 3 entries");
      head.b = b;
      m.heads.push_back(std::move(head));
    }
    if (m.heads.size() != (m.sep_act ? 3u : 1u)) throw UsageError("checkpoint has the wrong number of heads");
    const auto& w = j.at("loss_weights");
    m.weights = {w.at("lambda_reg").get<double>(), w.at("lambda_inv_trans").get<double>(),
                 w.at("lambda_inv_rot").get<double>()};
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw UsageError("malformed checkpoint: " + std::string(e.what()));
  }
}

/// Estimator that renders both views and runs a trained model on them.
inline Estimator model_estimator(LinearVoModel model) {
  return [model = std::move(model)](const StepContext& c) {
    Rng rng(c.seed);
    const std::uint64_t s0 = rng(), s1 = rng();
    const AgentState after = AgentState::from_pose(c.before.pose() * c.gt);
    const VecX f = pair_features(featurize_frame(render_depth(*c.grid, c.before, *c.sensor, s0), c.sensor->cam, model.features),
                                 featurize_frame(render_depth(*c.grid, after, *c.sensor, s1), c.sensor->cam, model.features));
    return predict(model, f, c.action).to_se2();
  };
}

}  // namespace pgvo
