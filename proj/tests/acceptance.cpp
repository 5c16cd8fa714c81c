// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and the wall time. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "pgvo/pgvo.hpp"

using namespace pgvo;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. SE(2) algebra

Se2 random_se2(Rng& rng) { return {uniform(rng, -kPi, kPi), uniform(rng, -5, 5), uniform(rng, -5, 5)}; }

double se2_distance(const Se2& a, const Se2& b) {
  return std::max({std::abs(normalize_angle(a.theta() - b.theta())), std::abs(a.x() - b.x()), std::abs(a.z() - b.z())});
}

Outcome criterion_1() {
  Rng rng(101);
  double worst_axiom = 0;
  for (int i = 0; i < 10000; ++i) {
    const Se2 a = random_se2(rng), b = random_se2(rng), c = random_se2(rng);
    worst_axiom = std::max({worst_axiom, se2_distance((a * b) * c, a * (b * c)), se2_distance(a * Se2::identity(), a),
                            se2_distance(Se2::identity() * a, a), se2_distance(a * inverse(a), Se2::identity()),
                            se2_distance(inverse(a) * a, Se2::identity())});
  }
  // goal carried by dead reckoning versus the goal expressed in the final frame
  double worst_closure = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Se2> steps;
    for (int k = 0; k < 100; ++k) steps.emplace_back(uniform(rng, -0.6, 0.6), uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
    const Vec2 goal(uniform(rng, -8, 8), uniform(rng, -8, 8));
    Vec2 v = goal;
    Mat3 pose = Mat3::Identity();
    for (const auto& s : steps) {
      v = update_goal(v, inverse(s));
      pose = pose * s.matrix();
    }
    const Vec2 truth = (pose.inverse() * Eigen::Vector3d(goal.x(), goal.y(), 1.0)).head<2>();
    worst_closure = std::max(worst_closure, (v - truth).norm());
  }
  return {worst_axiom < 1e-10 && worst_closure < 1e-9,
          "axioms max err " + fmt("%.2e", worst_axiom) + ", closure max err " + fmt("%.2e", worst_closure)};
}

// ---------------------------------------------------------------------------
// 2. invariance losses vanish on exact inverses

Outcome criterion_2() {
  Rng rng(202);
  double worst_rot = 0, worst_trans = 0;
  for (int i = 0; i < 10000; ++i) {
    const Se2 h = random_se2(rng);
    const auto f = Se2Params::from(h), b = Se2Params::from(inverse(h));
    worst_rot = std::max(worst_rot, rot_invariance_loss(f, b));
    worst_trans = std::max(worst_trans, trans_invariance_loss(f, b));
  }
  return {worst_rot < 1e-12 && worst_trans < 1e-12,
          "max rot " + fmt("%.2e", worst_rot) + ", max trans " + fmt("%.2e", worst_trans)};
}

// ---------------------------------------------------------------------------
// 3. analytic gradient versus central differences

Outcome criterion_3() {
  Rng rng(303);
  auto param = [&] { return Se2Params{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -kPi, kPi)}; };
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LossSample> batch(static_cast<std::size_t>(1 + trial % 8));
    for (auto& s : batch) s = {param(), param(), param()};
    const LossWeights w{uniform(rng, 0, 2), uniform(rng, 0, 2), uniform(rng, 0, 2)};
    const Reduction red = trial % 2 ? Reduction::mean : Reduction::sum;
    const auto g = combined_loss_gradient(batch, w, red);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto& s = batch[i / 6];
      double& x = i % 6 < 3 ? s.pred_fwd[i % 6] : s.pred_bwd[i % 6 - 3];
      const double x0 = x, h = 1e-6;
      x = x0 + h;
      const double up = combined_loss(batch, w, red);
      x = x0 - h;
      const double down = combined_loss(batch, w, red);
      x = x0;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-6}));
    }
  }
  return {worst < 1e-5, "max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------
// 4. one-hot encoding is stable inside an interval and changes across an edge

Outcome criterion_4() {
  Rng rng(404);
  const double z_min = 0.1, z_max = 10.0;
  std::size_t same = 0, crossing = 0, violations = 0;
  for (int k = 0; k < 100000; ++k) {
    const int n = 1 + k % 16;
    const double width = (z_max - z_min) / n;
    // depth images store float32, so the pair is drawn at that precision
    const float d = static_cast<float>(uniform(rng, z_min, z_max));
    const float d2 = static_cast<float>(std::clamp(d + uniform(rng, -width, width), z_min, z_max - 1e-6));
    // independent oracle: does any interior edge lie in (min, max]?
    bool crosses = false;
    for (int i = 1; i < n; ++i) {
      const double edge = z_min + i * (z_max - z_min) / n;
      if (std::min<double>(d, d2) < edge && edge <= std::max<double>(d, d2)) crosses = true;
    }
    const auto a = discretize_depth(DepthImage(1, 1, z_min, z_max, d), n);
    const auto b = discretize_depth(DepthImage(1, 1, z_min, z_max, d2), n);
    bool identical = true;
    for (int c = 0; c < n; ++c) identical = identical && a.at(c, 0, 0) == b.at(c, 0, 0);
    (crosses ? crossing : same)++;
    if (identical == crosses) ++violations;
  }
  return {violations == 0,
          std::to_string(same) + " within, " + std::to_string(crossing) + " crossing, " + std::to_string(violations) +
              " violations"};
}

// ---------------------------------------------------------------------------
// 5. soft projection rows

Outcome criterion_5() {
  bool walls = true;
  std::string detail;
  const auto cam = intrinsics_from_fov(90, 32, 24);
  const double z_min = 0.1, z_max = 10.0;
  // single wall: all mass in row floor(H (d - z_min) / (z_max - z_min))
  for (double d : {0.7, 2.0, 4.3, 9.5}) {
    const auto sp = soft_projection(DepthImage(32, 24, z_min, z_max, static_cast<float>(d)), cam, 40, 40);
    const int row = static_cast<int>(std::floor(40 * (d - z_min) / (z_max - z_min)));
    double off_row = 0, on_row = 0;
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 40; ++c) (r == row ? on_row : off_row) += sp.at(r, c);
    walls = walls && off_row == 0.0 && on_row > 0.0 && sp.max() == 1.0;
  }
  // two walls, one column: top half at 2 m, bottom half at 4 m, equal counts
  DepthImage two(32, 24, z_min, z_max, 2.0f);
  for (int v = 12; v < 24; ++v)
    for (int u = 0; u < 32; ++u) two.set(u, v, 4.0);
  const auto sp2 = soft_projection(two, cam, 90, 1);
  const int row_near = static_cast<int>(std::floor(90 * (2.0 - z_min) / (z_max - z_min)));
  const int row_far = static_cast<int>(std::floor(90 * (4.0 - z_min) / (z_max - z_min)));
  double total = 0;
  for (double v : sp2.cells) total += v;
  bool ok = walls && sp2.at(row_near, 0) == 1.0 && sp2.at(row_far, 0) == 1.0 && total == 2.0;
  // range property on random images
  Rng rng(505);
  int bad_range = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<float> vals(32 * 24);
    for (auto& v : vals) v = static_cast<float>(uniform(rng, z_min, z_max));
    const auto sp = soft_projection(DepthImage(32, 24, z_min, z_max, vals), cam, 48, 48);
    for (double v : sp.cells) bad_range += !(v >= 0.0 && v <= 1.0);
    bad_range += sp.max() != 1.0;
  }
  ok = ok && bad_range == 0;
  detail = "single-wall rows as predicted: " + std::string(walls ? "yes" : "no") + ", two-wall rows (" +
           std::to_string(row_near) + ", " + std::to_string(row_far) + ") = 1, range violations " +
           std::to_string(bad_range);
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 6. classical VO

Correspondences vo_scene(const Se2& motion, Rng& rng, const CameraIntrinsics& cam) {
  std::vector<Vec3> pts(150);
  for (auto& p : pts) p = {uniform(rng, -3, 3), uniform(rng, -1, 1), uniform(rng, 2, 8)};
  auto c = project_landmarks(pts, camera_motion_from_planar(motion), cam);
  if (c.size() > 50) c.resize(50);
  return c;
}

struct VoCheck {
  bool a = false, b = false;
  std::string detail, info;
};

VoCheck vo_check(ScaleMode mode) {
  const auto cam = intrinsics_from_fov(90, 640, 480);
  const ActuationNoiseModel noise;
  VoOptions opt;
  opt.scale_mode = mode;
  Rng rng(606);
  double max_x = 0, max_z = 0, max_t = 0;
  for (int k = 0; k < 100; ++k) {
    const Se2 m = sample_motion(kMovementActions[static_cast<std::size_t>(k % 3)], noise, rng);
    const auto est = planar_vo(vo_scene(m, rng, cam), cam, opt);
    max_x = std::max(max_x, std::abs(est.xi_x - m.x()));
    max_z = std::max(max_z, std::abs(est.xi_z - m.z()));
    max_t = std::max(max_t, std::abs(normalize_angle(est.theta - m.theta())));
  }
  VoCheck out;
  out.a = max_x < 1e-3 && max_z < 1e-3 && rad2deg(max_t) < 0.05;

  // paired trials: same motion and landmarks, 2% multiplicative depth noise
  double e_clean = 0, e_oracle = 0, e_full = 0, t_full = 0;
  const int trials = 500;
  for (int k = 0; k < trials; ++k) {
    const Se2 m = sample_motion(kMovementActions[static_cast<std::size_t>(k % 3)], noise, rng);
    const auto clean = vo_scene(m, rng, cam);
    auto noisy = clean;
    for (auto& p : noisy) {
      p.depth *= 1.0 + gaussian(rng, 0.0, 0.02);
      p.depth2 *= 1.0 + gaussian(rng, 0.0, 0.02);
    }
    auto mae = [&](const Se2Params& e) { return (std::abs(e.xi_x - m.x()) + std::abs(e.xi_z - m.z())) / 2.0; };
    const auto full = planar_vo(noisy, cam, opt);
    e_clean += mae(planar_vo(clean, cam, opt));
    e_oracle += mae(planar_vo_oracle(noisy, cam, m.theta(), opt));
    e_full += mae(full);
    t_full += std::abs(normalize_angle(full.theta - m.theta()));
  }
  e_clean /= trials;
  e_oracle /= trials;
  e_full /= trials;
  out.b = e_clean < e_oracle && e_oracle < e_full;
  const std::string name = mode == ScaleMode::projection ? "projection" : "norm";
  out.detail = name + ": (a) max err x " + fmt("%.1e", max_x) + " m, z " + fmt("%.1e", max_z) + " m, theta " +
               fmt("%.1e", rad2deg(max_t)) + " deg " + (out.a ? "ok" : "FAIL") + ", (b) E_noiseless " +
               fmt("%.3e", e_clean) + " < E_oracle " + fmt("%.6e", e_oracle) + " < E_full " + fmt("%.6e", e_full) +
               " " + (out.b ? "ok" : "FAIL");
  out.info = name + ": full-pipeline yaw MAE under depth noise " + fmt("%.3e", rad2deg(t_full / trials)) +
             " deg, E_full - E_oracle = " + fmt("%.3e", e_full - e_oracle) + " m";
  return out;
}

Outcome criterion_6(std::string& info) {
  const auto p = vo_check(ScaleMode::projection), n = vo_check(ScaleMode::norm);
  info = p.info + "; " + n.info;
  return {p.a && p.b && n.a && n.b, p.detail + "; " + n.detail};
}

// ---------------------------------------------------------------------------
// 7. metrics fixture table

Outcome criterion_7() {
  struct Row {
    double d_init, d_g, l, l_a;
    bool stopped;
    int s;
    double spl, soft;
  };
  const Row rows[] = {
      {5.0, 0.30, 5.0, 5.0, true, 1, 1.0, 0.94},  {5.0, 0.36, 5.0, 5.0, true, 0, 0.0, 0.928},
      {5.0, 0.3599, 5.0, 5.0, true, 1, 1.0, 0.92802}, {5.0, 0.10, 5.0, 5.0, false, 0, 0.0, 0.98},
      {5.0, 0.20, 4.0, 5.0, true, 1, 0.8, 0.768}, {10.0, 2.0, 8.0, 10.0, true, 0, 0.0, 0.64},
      {7.5, 0.0, 7.5, 7.5, true, 1, 1.0, 1.0},    {2.0, 3.0, 2.0, 1.0, false, 0, 0.0, -0.5},
  };
  int mismatches = 0;
  for (const auto& r : rows) {
    const auto m = nav_metrics(r.d_init, r.d_g, r.l, r.l_a, r.stopped);
    // values are compared at 1e-12 because the products are not exactly representable
    mismatches += m.success != r.s || std::abs(m.spl - r.spl) > 1e-12 || std::abs(m.soft_spl - r.soft) > 1e-12;
  }
  const bool spl_case = spl(1, 4.0, 5.0) == 0.8;
  return {mismatches == 0 && spl_case, std::to_string(std::size(rows)) + " rows, " + std::to_string(mismatches) +
                                           " mismatches; spl(l=4, l_a=5) = " + fmt("%.17g", spl(1, 4.0, 5.0))};
}

// ---------------------------------------------------------------------------
// 8. dataset brackets

Outcome criterion_8() {
  std::vector<OccupancyGrid> scenes;
  for (std::uint64_t i = 0; i < 8; ++i) scenes.push_back(random_scene(800 + i));
  DatasetOptions opt;
  opt.n_samples = 10000;
  opt.seed = 808;
  opt.render = false;
  const auto data = generate_vo_dataset(scenes, opt);
  const auto& st = data.stats;
  const double rate = st.collision_rate();
  const double f = st.action_fraction(Action::move_forward), l = st.action_fraction(Action::turn_left),
               r = st.action_fraction(Action::turn_right);
  const bool ok = rate >= 0.05 && rate <= 0.20 && std::abs(f - 0.57) <= 0.10 && std::abs(l - 0.21) <= 0.10 &&
                  std::abs(r - 0.21) <= 0.10;
  return {ok, "collision rate " + fmt("%.4f", rate) + ", actions " + fmt("%.3f", f) + "/" + fmt("%.3f", l) + "/" +
                  fmt("%.3f", r) + " over " + std::to_string(st.total) + " samples"};
}

// ---------------------------------------------------------------------------
// 9. navigation with dead reckoning

Outcome criterion_9() {
  const OccupancyGrid grid = OccupancyGrid::empty_room(10.0, 10.0, 0.05);
  const SceneNav scene(grid, kAgentRadius);
  EpisodeOptions opt;
  const Policy policy = greedy_policy();
  std::vector<EpisodeTask> tasks;
  for (std::uint64_t i = 0; i < 50; ++i) tasks.push_back(sample_episode(scene, 1.5, 12.0, derive_seed(909, i)));

  struct Summary {
    double success = 0, spl = 0, min_spl = 1;
  };
  auto run_all = [&](const Estimator& est) {
    Summary s;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto ep = run_episode(grid, scene.placement(), tasks[i].start, tasks[i].goal, policy, est, opt,
                                  derive_seed(9090, i));
      s.success += ep.metrics.success;
      s.spl += ep.metrics.spl;
      s.min_spl = std::min(s.min_spl, ep.metrics.spl);
    }
    s.success /= static_cast<double>(tasks.size());
    s.spl /= static_cast<double>(tasks.size());
    return s;
  };
  const Summary gt = run_all(gt_estimator()), zero = run_all(zero_estimator()), cls = run_all(classical_estimator());
  double min_start = 1e9;
  for (const auto& s : tasks) min_start = std::min(min_start, (s.goal - s.start.position).norm());
  const bool ok = gt.success == 1.0 && gt.spl > 0.95 && zero.success == 0.0 && min_start > kSuccessDistance &&
                  cls.success >= 0.9;
  return {ok, "gt S " + fmt("%.2f", gt.success) + " mean SPL " + fmt("%.4f", gt.spl) + " (min " +
                  fmt("%.4f", gt.min_spl) + "); zero S " + fmt("%.2f", zero.success) + " (closest start " +
                  fmt("%.2f", min_start) + " m); classical S " + fmt("%.2f", cls.success) + " mean SPL " +
                  fmt("%.4f", cls.spl)};
}

// ---------------------------------------------------------------------------
// 10. trainer

VecX gaussian_vec(Rng& rng, Eigen::Index n) {
  VecX v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian(rng, 0, 1);
  return v;
}

std::vector<TrainingExample> random_pairs(Rng& rng, std::size_t n, Eigen::Index frame_dim) {
  std::vector<TrainingExample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VecX a = gaussian_vec(rng, frame_dim), b = gaussian_vec(rng, frame_dim);
    out[i].fwd = pair_features(a, b);
    out[i].bwd = pair_features(b, a);
    out[i].action = kMovementActions[i % 3];
  }
  return out;
}

void plant(std::vector<TrainingExample>& data, const MatX& A, const std::array<Eigen::Vector3d, 3>& offset) {
  for (auto& e : data) {
    const Eigen::Vector3d y = A * e.fwd + offset[action_index(e.action)];
    e.gt = {y(0), y(1), y(2)};
  }
}

double regression_error(const LinearVoModel& m, const std::vector<TrainingExample>& data) {
  double sum = 0;
  for (const auto& e : data) sum += regression_loss(predict(m, e.fwd, e.action), e.gt);
  return sum / static_cast<double>(data.size());
}

std::vector<TrainingExample> rendered_examples(std::size_t n, std::uint64_t seed, const CameraIntrinsics& cam,
                                               const FeatureConfig& cfg) {
  DatasetOptions opt;
  opt.n_samples = n;
  opt.seed = seed;
  opt.sensor.cam = cam;
  std::vector<OccupancyGrid> scenes;
  for (std::uint64_t i = 0; i < 4; ++i) scenes.push_back(random_scene(seed * 10 + i));
  std::vector<TrainingExample> out;
  for (const auto& s : generate_vo_dataset(scenes, opt).samples) out.push_back(make_example(s, cam, cfg));
  return out;
}

struct SysComparison {
  double model = 0, baseline = 0;
};

SysComparison compare_with_sys_error(const std::vector<TrainingExample>& train, const std::vector<TrainingExample>& val,
                                     const FitOptions& opt) {
  const auto r = fit(train, opt);
  std::vector<Se2Params> tg, vg, preds;
  std::vector<Action> ta, va;
  for (const auto& e : train) {
    tg.push_back(e.gt);
    ta.push_back(e.action);
  }
  for (const auto& e : val) {
    vg.push_back(e.gt);
    va.push_back(e.action);
    preds.push_back(predict(r.model, e.fwd, e.action));
  }
  const auto m = per_step_vo_error(preds, vg, va).overall, b = sys_error(tg, ta, vg, va).overall;
  return {m.xi_x + m.xi_z + m.theta, b.xi_x + b.xi_z + b.theta};
}

Outcome criterion_10(std::string& info) {
  Rng rng(1010);
  // (a) planted affine
  auto planted = random_pairs(rng, 200, 3);
  MatX A(3, 9);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = gaussian(rng, 0, 0.3);
  plant(planted, A, {Eigen::Vector3d(0.01, -0.25, 0.1), Eigen::Vector3d(0.01, -0.25, 0.1),
                     Eigen::Vector3d(0.01, -0.25, 0.1)});
  FitOptions reg;
  reg.weights = {1, 0, 0};
  const double planted_loss = fit(planted, reg).final_loss;
  const bool a = planted_loss < 1e-8;

  // (b) per-action offsets
  auto train = random_pairs(rng, 300, 3), val = random_pairs(rng, 150, 3);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = gaussian(rng, 0, 0.05);
  const std::array<Eigen::Vector3d, 3> offsets{Eigen::Vector3d(0, -0.25, 0), Eigen::Vector3d(0, 0, 0.52),
                                               Eigen::Vector3d(0, 0, -0.52)};
  plant(train, A, offsets);
  plant(val, A, offsets);
  const double shared = regression_error(fit(train, reg).model, val);
  FitOptions reg_sep = reg;
  reg_sep.sep_act = true;
  const double sep = regression_error(fit(train, reg_sep).model, val);
  const bool b = sep < shared;

  // (c) rendered simulator data, held-out scenes
  const auto cam = intrinsics_from_fov(90, 16, 12);
  const FeatureConfig cfg{2, 2, 5, 32};
  const auto rtrain = rendered_examples(1500, 1, cam, cfg), rval = rendered_examples(750, 2, cam, cfg);
  FitOptions sys_opt = reg_sep;
  sys_opt.epochs = 300;
  const auto cmp = compare_with_sys_error(rtrain, rval, sys_opt);
  const bool c = cmp.model < cmp.baseline;
  sys_opt.weights = {1, 1, 1};
  const auto cmp_inv = compare_with_sys_error(rtrain, rval, sys_opt);
  info = "with invariance weights (1, 1, 1) the same model scores " + fmt("%.4f", cmp_inv.model) + " vs sys_error " +
         fmt("%.4f", cmp_inv.baseline);

  // (d) dropout averaging identity, exhaustive over masks
  double worst = 0;
  for (Eigen::Index n = 1; n <= 10; ++n) {
    const MatX W = MatX::NullaryExpr(4, n, [&]() { return gaussian(rng, 0, 1); });
    const VecX bias = gaussian_vec(rng, 4), x = gaussian_vec(rng, n);
    for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
      const auto r = dropout_average_identity(W, bias, p, x);
      worst = std::max(worst, (r.exhaustive_mean - r.scaled_output).cwiseAbs().maxCoeff());
    }
  }
  const bool d = worst < 1e-12;
  return {a && b && c && d, "(a) planted loss " + fmt("%.2e", planted_loss) + "; (b) sep " + fmt("%.2e", sep) +
                                " < shared " + fmt("%.2e", shared) + "; (c) model " + fmt("%.4f", cmp.model) +
                                " < sys_error " + fmt("%.4f", cmp.baseline) + "; (d) dropout max err " +
                                fmt("%.2e", worst)};
}

// ---------------------------------------------------------------------------
// 11. CLI determinism

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const fs::path& work, const std::string& args) {
  const fs::path out = work / "stdout.txt";
  const std::string cmd = std::string(PGVO_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out)};
}

// Every regular file under `dir`, keyed by relative path.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "stdout.txt")
      out.emplace_back(fs::relative(e.path(), dir).string(), read_file(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome criterion_11() {
  const fs::path root = fs::temp_directory_path() / "pgvo_acceptance_cli";
  fs::remove_all(root);
  const std::string small = "--set camera.width=16 --set camera.height=12 --set features.pool_rows=2 "
                            "--set features.pool_cols=2 --set depth.bins=5 --set train.epochs=60 ";
  std::vector<std::string> differing;
  std::vector<std::vector<std::pair<std::string, std::string>>> snaps;
  std::vector<std::string> outputs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path w = root / ("run" + std::to_string(run));
    fs::create_directories(w);
    save_depth(w / "wall.dpth", DepthImage(64, 48, 0.1, 10.0, 3.0f));
    const std::string s = w.string();
    const std::vector<std::string> cmds{
        "--seed 11 make-scenes " + s + "/scenes --count 3",
        "--seed 11 " + small + "generate-dataset " + s + "/scenes 200 " + s + "/data",
        "--seed 11 " + small + "train " + s + "/data " + s + "/model.json",
        "--seed 11 " + small + "simulate " + s + "/scenes/scene_000.txt --episodes 3 --estimator gt --out-dir " + s +
            "/logs_gt",
        "--seed 11 " + small + "simulate " + s + "/scenes/scene_001.txt --episodes 2 --estimator classical --out-dir " +
            s + "/logs_cls",
        "--seed 11 " + small + "simulate " + s + "/scenes/scene_002.txt --episodes 2 --estimator model:" + s +
            "/model.json --out-dir " + s + "/logs_model",
        "--seed 11 " + small + "simulate " + s + "/scenes/scene_000.txt --episodes 1 --estimator zero --out-dir " + s +
            "/logs_zero",
        "--seed 11 evaluate " + s + "/logs_gt --out " + s + "/table.csv",
        "--seed 11 project-depth " + s + "/wall.dpth " + s + "/wall.pgm",
        "--seed 11 show-config",
    };
    for (const auto& c : cmds) {
      const auto r = cli(w, c);
      if (r.code != 0) return {false, "command failed (" + std::to_string(r.code) + "): pgvo " + c + "\n" + r.out};
      // paths differ between the two runs; compare stdout with them removed
      std::string text = r.out;
      for (std::size_t p; (p = text.find(s)) != std::string::npos;) text.erase(p, s.size());
      outputs[run].push_back(text);
    }
    snaps.push_back(snapshot(w));
  }
  for (std::size_t i = 0; i < outputs[0].size(); ++i)
    if (outputs[0][i] != outputs[1][i]) differing.push_back("stdout of command " + std::to_string(i + 1));
  if (snaps[0].size() != snaps[1].size()) differing.push_back("file lists");
  for (std::size_t i = 0; i < std::min(snaps[0].size(), snaps[1].size()); ++i)
    if (snaps[0][i] != snaps[1][i]) differing.push_back(snaps[0][i].first);
  const std::size_t files = snaps[0].size();
  fs::remove_all(root);
  std::string detail = std::to_string(outputs[0].size()) + " commands, " + std::to_string(files) + " files compared";
  if (!differing.empty()) detail += "; differing: " + differing.front();
  return {differing.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double budget_s;  // 0 means no runtime bound
    std::function<Outcome(std::string&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, 1.0, [](std::string&) { return criterion_1(); }},
      {2, 1.0, [](std::string&) { return criterion_2(); }},
      {3, 5.0, [](std::string&) { return criterion_3(); }},
      {4, 2.0, [](std::string&) { return criterion_4(); }},
      {5, 1.0, [](std::string&) { return criterion_5(); }},
      {6, 30.0, criterion_6},
      {7, 0.0, [](std::string&) { return criterion_7(); }},
      {8, 60.0, [](std::string&) { return criterion_8(); }},
      {9, 120.0, [](std::string&) { return criterion_9(); }},
      {10, 60.0, criterion_10},
      {11, 0.0, [](std::string&) { return criterion_11(); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::string info;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(info);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %2d: %s  %s [%.2f s%s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                in_time ? "" : (", over budget " + fmt("%.0f", c.budget_s) + " s").c_str());
    if (!info.empty()) std::printf("              note: %s\n", info.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
