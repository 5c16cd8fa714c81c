#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pgvo/action.hpp"
#include "pgvo/camera.hpp"
#include "pgvo/dataset.hpp"
#include "pgvo/depth.hpp"
#include "pgvo/error.hpp"
#include "pgvo/losses.hpp"

namespace pgvo {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Features

/// Pooling layout for the observation features. Each frame contributes the
/// cell means of depth / z_max, of every d-depth channel and of the soft
/// projection over a pool_rows x pool_cols grid.
struct FeatureConfig {
  int pool_rows = 3;
  int pool_cols = 4;
  int depth_bins = 10;
  int projection_size = 32;

  void validate() const {
    if (pool_rows < 1 || pool_cols < 1) throw UsageError("pool grid must be at least 1x1");
    if (depth_bins < 1) throw UsageError("depth_bins must be >= 1");
    if (projection_size < std::max(pool_rows, pool_cols))
      throw UsageError("projection_size must be at least the pool grid size");
  }

  int frame_dim() const { return pool_rows * pool_cols * (depth_bins + 2); }
  int pair_dim() const { return 3 * frame_dim(); }

  bool operator==(const FeatureConfig&) const = default;
};

namespace detail {

/// Means of `value(r, c)` over a rows x cols image split into a ph x pw grid.
template <class Fn>
void pool_means(int rows, int cols, int ph, int pw, Fn&& value, VecX& out, Eigen::Index& k) {
  for (int i = 0; i < ph; ++i) {
    const int r0 = i * rows / ph, r1 = (i + 1) * rows / ph;
    for (int j = 0; j < pw; ++j) {
      const int c0 = j * cols / pw, c1 = (j + 1) * cols / pw;
      double sum = 0.0;
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) sum += value(r, c);
      const int n = (r1 - r0) * (c1 - c0);
      out(k++) = n > 0 ? sum / n : 0.0;
    }
  }
}

}  // namespace detail

inline VecX featurize_frame(const DepthImage& depth, const CameraIntrinsics& cam, const FeatureConfig& cfg) {
  cfg.validate();
  check_dims(depth, cam);
  if (depth.height() < cfg.pool_rows || depth.width() < cfg.pool_cols)
    throw UsageError("pool grid is larger than the depth image");
  VecX f(cfg.frame_dim());
  Eigen::Index k = 0;
  const int h = depth.height(), w = depth.width();
  const double zmax = depth.z_max();
  detail::pool_means(h, w, cfg.pool_rows, cfg.pool_cols, [&](int r, int c) { return depth.at(c, r) / zmax; }, f, k);
  const auto dd = discretize_depth(depth, cfg.depth_bins);
  for (int ch = 0; ch < cfg.depth_bins; ++ch)
    detail::pool_means(h, w, cfg.pool_rows, cfg.pool_cols, [&](int r, int c) { return double(dd.at(ch, c, r)); }, f, k);
  const auto sp = soft_projection(depth, cam, cfg.projection_size, cfg.projection_size);
  detail::pool_means(sp.rows, sp.cols, cfg.pool_rows, cfg.pool_cols, [&](int r, int c) { return sp.at(r, c); }, f, k);
  return f;
}

/// [a, b, b - a] for the ordered pair (frame a, frame b).
inline VecX pair_features(const VecX& a, const VecX& b) {
  if (a.size() != b.size()) throw UsageError("frame feature sizes differ");
  VecX f(3 * a.size());
  f << a, b, b - a;
  return f;
}

inline VecX featurize(const Observation& obs, const CameraIntrinsics& cam, const FeatureConfig& cfg) {
  return pair_features(featurize_frame(obs.depth_t, cam, cfg), featurize_frame(obs.depth_t1, cam, cfg));
}

/// Forward-pair features, swapped-pair features, label and action.
struct TrainingExample {
  VecX fwd;
  VecX bwd;
  Action action = Action::move_forward;
  Se2Params gt;
};

inline TrainingExample make_example(const VoSample& s, const CameraIntrinsics& cam, const FeatureConfig& cfg) {
  if (!s.obs) throw UsageError("sample " + s.id + " has no observations");
  const VecX a = featurize_frame(s.obs->depth_t, cam, cfg);
  const VecX b = featurize_frame(s.obs->depth_t1, cam, cfg);
  return {pair_features(a, b), pair_features(b, a), s.action, s.gt};
}

// ---------------------------------------------------------------------------
// Model

struct LinearHead {
  MatX W;  // 3 x dim, rows (xi_x, xi_z, theta)
  Eigen::Vector3d b = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const VecX& x) const { return W * x + b; }
};

/// Affine map from standardized features to (xi_x, xi_z, theta). With
/// sep_act there is one head per movement action, otherwise a single head.
struct LinearVoModel {
  FeatureConfig features;
  bool sep_act = false;
  VecX feature_mean;
  VecX feature_scale;
  std::vector<LinearHead> heads;
  LossWeights weights;
  std::uint64_t seed = 0;

  Eigen::Index dim() const { return feature_mean.size(); }

  static LinearVoModel zero(Eigen::Index dim, bool sep_act) {
    LinearVoModel m;
    m.sep_act = sep_act;
    m.feature_mean = VecX::Zero(dim);
    m.feature_scale = VecX::Ones(dim);
    m.heads.assign(sep_act ? 3 : 1, LinearHead{MatX::Zero(3, dim), Eigen::Vector3d::Zero()});
    return m;
  }

  const LinearHead& head(Action a) const {
    if (!is_movement(a)) throw UsageError("cannot predict for action " + (is_valid(a) ? to_string(a) : std::to_string(static_cast<int>(a))));
    return heads[sep_act ? action_index(a) : 0];
  }

  VecX standardize(const VecX& f) const {
    if (f.size() != dim()) throw UsageError("feature dimension does not match the model");
    return (f - feature_mean).cwiseQuotient(feature_scale);
  }
};

inline Se2Params predict(const LinearVoModel& m, const VecX& f, Action a) {
  const Eigen::Vector3d y = m.head(a).apply(m.standardize(f));
  return {y(0), y(1), y(2)};
}

// ---------------------------------------------------------------------------
// Training

struct FitOptions {
  LossWeights weights;
  double learning_rate = 0.1;  // initial step; adapted by backtracking
  int epochs = 500;
  std::uint64_t seed = 0;
  bool sep_act = false;
  Reduction reduction = Reduction::mean;
};

struct FitResult {
  LinearVoModel model;
  std::vector<double> loss_curve;  // combined loss after each epoch, summed over heads
  double final_loss = 0.0;
};

namespace detail {

inline std::vector<LossSample> head_predictions(const LinearHead& h, const std::vector<VecX>& xf,
                                                const std::vector<VecX>& xb, const std::vector<Se2Params>& gt) {
  std::vector<LossSample> out(xf.size());
  for (std::size_t i = 0; i < xf.size(); ++i) {
    const Eigen::Vector3d pf = h.apply(xf[i]), pb = h.apply(xb[i]);
    out[i] = {{pf(0), pf(1), pf(2)}, {pb(0), pb(1), pb(2)}, gt[i]};
  }
  return out;
}

/// Full-batch descent for one head. Steps that raise the loss are rejected
/// and the step halves; accepted steps grow it by 1.5.
inline std::vector<double> descend(LinearHead& h, const std::vector<VecX>& xf, const std::vector<VecX>& xb,
                                   const std::vector<Se2Params>& gt, const FitOptions& opt) {
  std::vector<double> curve;
  double eta = opt.learning_rate;
  auto batch = head_predictions(h, xf, xb, gt);
  double loss = combined_loss(batch, opt.weights, opt.reduction);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const auto g = combined_loss_gradient(batch, opt.weights, opt.reduction);
    MatX gw = MatX::Zero(3, h.W.cols());
    Eigen::Vector3d gb = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < xf.size(); ++i) {
      const Eigen::Vector3d df(g[6 * i], g[6 * i + 1], g[6 * i + 2]);
      const Eigen::Vector3d db(g[6 * i + 3], g[6 * i + 4], g[6 * i + 5]);
      gw.noalias() += df * xf[i].transpose() + db * xb[i].transpose();
      gb += df + db;
    }
    const double gnorm2 = gw.squaredNorm() + gb.squaredNorm();
    if (gnorm2 == 0.0) {
      curve.push_back(loss);
      continue;
    }
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      LinearHead cand{h.W - eta * gw, h.b - eta * gb};
      auto cand_batch = head_predictions(cand, xf, xb, gt);
      const double cand_loss = combined_loss(cand_batch, opt.weights, opt.reduction);
      if (cand_loss <= loss) {
        h = std::move(cand);
        batch = std::move(cand_batch);
        loss = cand_loss;
        eta *= 1.5;
        accepted = true;
      } else {
        eta *= 0.5;
      }
    }
    curve.push_back(loss);
  }
  return curve;
}

}  // namespace detail

inline FitResult fit(const std::vector<TrainingExample>& data, const FitOptions& opt) {
  if (data.empty()) throw UsageError("empty dataset");
  opt.weights.validate();
  if (opt.epochs < 0) throw UsageError("epochs must be non-negative");
  if (!(opt.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  const Eigen::Index dim = data.front().fwd.size();
  for (const auto& e : data)
    if (e.fwd.size() != dim || e.bwd.size() != dim) throw UsageError("inconsistent feature dimensions");

  FitResult res;
  res.model = LinearVoModel::zero(dim, opt.sep_act);
  res.model.weights = opt.weights;
  res.model.seed = opt.seed;

  // standardization over forward and reversed features together
  VecX mean = VecX::Zero(dim), sq = VecX::Zero(dim);
  for (const auto& e : data) {
    mean += e.fwd + e.bwd;
    sq += e.fwd.cwiseAbs2() + e.bwd.cwiseAbs2();
  }
  const double n2 = 2.0 * static_cast<double>(data.size());
  mean /= n2;
  VecX scale = (sq / n2 - mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (!(scale(j) > 1e-12)) scale(j) = 1.0;
  res.model.feature_mean = mean;
  res.model.feature_scale = scale;

  const std::size_t n_heads = res.model.heads.size();
  res.loss_curve.assign(static_cast<std::size_t>(opt.epochs), 0.0);
  for (std::size_t hidx = 0; hidx < n_heads; ++hidx) {
    std::vector<VecX> xf, xb;
    std::vector<Se2Params> gt;
    for (const auto& e : data) {
      if (opt.sep_act && action_index(e.action) != hidx) continue;
      xf.push_back(res.model.standardize(e.fwd));
      xb.push_back(res.model.standardize(e.bwd));
      gt.push_back(e.gt);
    }
    if (xf.empty()) throw UsageError("no training samples for action " + to_string(kMovementActions[hidx]));
    auto& head = res.model.heads[hidx];
    const auto curve = detail::descend(head, xf, xb, gt, opt);
    for (std::size_t k = 0; k < curve.size(); ++k) res.loss_curve[k] += curve[k];
    res.final_loss += combined_loss(detail::head_predictions(head, xf, xb, gt), opt.weights, opt.reduction);
  }
  return res;
}

/// Combined loss of a finished model on a set of examples.
inline double evaluate_loss(const LinearVoModel& m, const std::vector<TrainingExample>& data, const LossWeights& w,
                            Reduction reduction = Reduction::mean) {
  std::vector<LossSample> batch;
  batch.reserve(data.size());
  for (const auto& e : data) batch.push_back({predict(m, e.fwd, e.action), predict(m, e.bwd, e.action), e.gt});
  return combined_loss(batch, w, reduction);
}

// ---------------------------------------------------------------------------
// Dropout averaging

struct DropoutAverage {
  VecX exhaustive_mean;
  VecX scaled_output;
};

/// Expectation of W (m .* x) + b over Bernoulli(p_keep) input masks, computed
/// by enumerating all 2^n masks, next to the deterministic W (p_keep x) + b.
inline DropoutAverage dropout_average_identity(const MatX& W, const VecX& b, double p_keep, const VecX& x) {
  const Eigen::Index n = x.size();
  if (n > 20) throw UsageError("enumeration infeasible");
  if (W.cols() != n || W.rows() != b.size()) throw UsageError("affine layer dimensions do not match");
  if (!(p_keep >= 0.0 && p_keep <= 1.0)) throw UsageError("p_keep must lie in [0, 1]");
  DropoutAverage out{VecX::Zero(b.size()), W * (p_keep * x) + b};
  const std::uint64_t masks = std::uint64_t{1} << n;
  VecX masked(n);
  for (std::uint64_t m = 0; m < masks; ++m) {
    double prob = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool keep = (m >> j) & 1u;
      prob *= keep ? p_keep : 1.0 - p_keep;
      masked(j) = keep ? x(j) : 0.0;
    }
    if (prob == 0.0) continue;
    out.exhaustive_mean += prob * (W * masked + b);
  }
  return out;
}

}  // namespace pgvo
