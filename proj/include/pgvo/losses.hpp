#pragma once

#include <array>
#include <span>
#include <vector>

#include "pgvo/error.hpp"
#include "pgvo/se2.hpp"

namespace pgvo {

/// Raw regression head output (xi_x, xi_z, theta). Theta is not wrapped.
struct Se2Params {
  double xi_x = 0.0;
  double xi_z = 0.0;
  double theta = 0.0;

  static Se2Params from(const Se2& h) { return {h.x(), h.z(), h.theta()}; }
  Se2 to_se2() const { return {theta, xi_x, xi_z}; }
  Vec2 xi() const { return {xi_x, xi_z}; }

  double& operator[](std::size_t i) { return i == 0 ? xi_x : (i == 1 ? xi_z : theta); }
  double operator[](std::size_t i) const { return i == 0 ? xi_x : (i == 1 ? xi_z : theta); }

  bool operator==(const Se2Params&) const = default;
};

struct LossWeights {
  double lambda_reg = 1.0;
  double lambda_inv_trans = 1.0;
  double lambda_inv_rot = 1.0;

  void validate() const {
    if (lambda_reg < 0 || lambda_inv_trans < 0 || lambda_inv_rot < 0)
      throw UsageError("loss weights must be non-negative");
  }
};

enum class Reduction { sum, mean };

/// One training pair: prediction on (I_t, I_t+1), prediction on the swapped
/// pair (I_t+1, I_t), and the forward ground truth.
struct LossSample {
  Se2Params pred_fwd;
  Se2Params pred_bwd;
  Se2Params gt;
};

inline double regression_loss(const Se2Params& pred, const Se2Params& gt) {
  const double dx = gt.xi_x - pred.xi_x, dz = gt.xi_z - pred.xi_z, dt = gt.theta - pred.theta;
  return dx * dx + dz * dz + dt * dt;
}

inline double rot_invariance_loss(const Se2Params& fwd, const Se2Params& bwd) {
  const double s = fwd.theta + bwd.theta;
  return s * s;
}

inline Vec2 trans_invariance_residual(const Se2Params& fwd, const Se2Params& bwd) {
  return fwd.xi() + rotation2(fwd.theta) * bwd.xi();
}

inline double trans_invariance_loss(const Se2Params& fwd, const Se2Params& bwd) {
  return trans_invariance_residual(fwd, bwd).squaredNorm();
}

inline double sample_loss(const LossSample& s, const LossWeights& w) {
  return w.lambda_reg * regression_loss(s.pred_fwd, s.gt) +
         w.lambda_inv_trans * trans_invariance_loss(s.pred_fwd, s.pred_bwd) +
         w.lambda_inv_rot * rot_invariance_loss(s.pred_fwd, s.pred_bwd);
}

inline double combined_loss(std::span<const LossSample> batch, const LossWeights& w,
                            Reduction reduction = Reduction::sum) {
  if (batch.empty()) throw UsageError("empty batch");
  double total = 0.0;
  for (const auto& s : batch) total += sample_loss(s, w);
  return reduction == Reduction::mean ? total / static_cast<double>(batch.size()) : total;
}

/// Partial derivatives of one sample's weighted loss. Layout:
/// [fwd.xi_x, fwd.xi_z, fwd.theta, bwd.xi_x, bwd.xi_z, bwd.theta].
inline std::array<double, 6> sample_loss_gradient(const LossSample& s, const LossWeights& w) {
  std::array<double, 6> g{};
  const auto& f = s.pred_fwd;
  const auto& b = s.pred_bwd;

  for (std::size_t i = 0; i < 3; ++i) g[i] += w.lambda_reg * 2.0 * (f[i] - s.gt[i]);

  const double rot = 2.0 * (f.theta + b.theta);
  g[2] += w.lambda_inv_rot * rot;
  g[5] += w.lambda_inv_rot * rot;

  const Mat2 r = rotation2(f.theta);
  Mat2 dr;
  dr << -std::sin(f.theta), -std::cos(f.theta), std::cos(f.theta), -std::sin(f.theta);
  const Vec2 res = f.xi() + r * b.xi();
  const Vec2 d_fxi = 2.0 * res;
  const Vec2 d_bxi = 2.0 * (r.transpose() * res);
  const double d_ftheta = 2.0 * res.dot(dr * b.xi());
  g[0] += w.lambda_inv_trans * d_fxi.x();
  g[1] += w.lambda_inv_trans * d_fxi.y();
  g[2] += w.lambda_inv_trans * d_ftheta;
  g[3] += w.lambda_inv_trans * d_bxi.x();
  g[4] += w.lambda_inv_trans * d_bxi.y();
  return g;
}

/// Gradient of combined_loss with respect to every prediction component,
/// six entries per sample in sample order (see sample_loss_gradient).
inline std::vector<double> combined_loss_gradient(std::span<const LossSample> batch,
                                                  const LossWeights& w,
                                                  Reduction reduction = Reduction::sum) {
  if (batch.empty()) throw UsageError("empty batch");
  const double scale = reduction == Reduction::mean ? 1.0 / static_cast<double>(batch.size()) : 1.0;
  std::vector<double> grad;
  grad.reserve(batch.size() * 6);
  for (const auto& s : batch) {
    for (double v : sample_loss_gradient(s, w)) grad.push_back(scale * v);
  }
  return grad;
}

}  // namespace pgvo
