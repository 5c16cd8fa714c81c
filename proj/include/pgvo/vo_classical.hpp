#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "pgvo/camera.hpp"
#include "pgvo/correspondences.hpp"
#include "pgvo/error.hpp"
#include "pgvo/losses.hpp"
#include "pgvo/random.hpp"
#include "pgvo/se2.hpp"

namespace pgvo {

using Mat3d = Eigen::Matrix3d;

/// Rigid camera motion in the pinhole frame: X_{t+1} = R * X_t + t.
struct CameraMotion {
  Mat3d R = Mat3d::Identity();
  Vec3 t = Vec3::Zero();
};

/// Rotation about the camera's vertical axis whose ground-plane block equals
/// the planar rotation R(theta).
inline Mat3d yaw_rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat3d r;
  r << c, 0, -s, 0, 1, 0, s, 0, c;
  return r;
}

// The planar frame (x left, z back) is the camera's ground plane (x right,
// z forward) turned by 180 degrees, so rotations carry over unchanged and
// translations flip sign.

/// Camera coordinate change for an agent motion m (pose of frame t+1 in frame t).
inline CameraMotion camera_motion_from_planar(const Se2& m) {
  const Mat3d r_pose = yaw_rotation(m.theta());
  const Vec3 t_pose(-m.x(), 0.0, -m.z());
  return {r_pose.transpose(), -(r_pose.transpose() * t_pose)};
}

inline double yaw_of(const Mat3d& r_pose) { return std::atan2(r_pose(2, 0), r_pose(0, 0)); }

/// Angle of the rotation left after removing the best yaw.
inline double out_of_plane_angle(const Mat3d& r_pose) {
  const Mat3d residual = yaw_rotation(yaw_of(r_pose)).transpose() * r_pose;
  return std::acos(std::clamp((residual.trace() - 1.0) / 2.0, -1.0, 1.0));
}

/// Translation reported when the matches are explained by a rotation alone.
enum class LowParallaxTranslation {
  reprojection,  // metric pose from frame-t depths and frame-t+1 pixels
  zero,
};

enum class ScaleMode {
  projection,  // mean of (p' - R p) . t_dir
  norm,        // mean of |p' - R p|
};

struct VoOptions {
  int ransac_iterations = 200;
  double inlier_threshold = 1e-3;   // Sampson distance, normalized image units
  double low_parallax_rad = 1e-4;   // median rotation-compensated parallax
  double degeneracy_ratio = 1e-10;  // sigma_8 / sigma_1 of the epipolar design matrix
  double max_out_of_plane_deg = 5.0;
  ScaleMode scale_mode = ScaleMode::projection;
  LowParallaxTranslation low_parallax_translation = LowParallaxTranslation::reprojection;
  std::uint64_t seed = 0x5eed;
};

struct EssentialResult {
  Mat3d E = Mat3d::Zero();
  std::vector<bool> inlier_mask;
  /// Set when the matches are explained by a rotation alone; E is then zero
  /// and `rotation` holds the best-fit rotation.
  bool low_parallax = false;
  Mat3d rotation = Mat3d::Identity();
  double median_parallax = 0.0;

  std::size_t inlier_count() const {
    return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
  }
};

struct RecoveredPose {
  Mat3d R = Mat3d::Identity();
  Vec3 t_dir = Vec3::UnitZ();
  bool low_parallax = false;  // t_dir carries no information when set
  std::vector<bool> inlier_mask;
  int cheirality_count = 0;
};

namespace detail {

inline Vec3 bearing(const CameraIntrinsics& cam, const Eigen::Vector2d& uv) {
  return cam.ray(uv.x(), uv.y());
}

/// Isotropic normalization: centroid to origin, mean distance sqrt(2).
inline Mat3d hartley_transform(const std::vector<Vec3>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p.head<2>();
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p.head<2>() - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? std::numbers::sqrt2 / mean_dist : 1.0;
  Mat3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

inline Eigen::Matrix<double, 1, 9> epipolar_row(const Vec3& a, const Vec3& b) {
  Eigen::Matrix<double, 1, 9> row;
  row << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(), b.y() * a.y(), b.y(), a.x(), a.y(), 1.0;
  return row;
}

/// Projects onto the essential manifold with singular values (1, 1, 0).
inline Mat3d enforce_essential(const Mat3d& e) {
  Eigen::JacobiSVD<Mat3d> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * Eigen::Vector3d(1, 1, 0).asDiagonal() * svd.matrixV().transpose();
}

struct LinearFit {
  Mat3d E;
  bool degenerate;
};

/// Least-squares 8-point solve on Hartley-normalized points, mapped back to
/// normalized camera coordinates.
inline LinearFit solve_eight_point(const std::vector<Vec3>& x1, const std::vector<Vec3>& x2,
                                   const std::vector<std::size_t>& idx, const Mat3d& t1,
                                   const Mat3d& t2, double degeneracy_ratio) {
  const Eigen::Index rows = std::max<Eigen::Index>(9, static_cast<Eigen::Index>(idx.size()));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, 9);
  for (std::size_t k = 0; k < idx.size(); ++k)
    a.row(static_cast<Eigen::Index>(k)) = epipolar_row(t1 * x1[idx[k]], t2 * x2[idx[k]]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const bool degenerate = !(sv(0) > 0.0) || sv(7) < degeneracy_ratio * sv(0);
  Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Mat3d en;
  en << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  return {enforce_essential(t2.transpose() * en * t1), degenerate};
}

inline double sampson_distance(const Mat3d& e, const Vec3& a, const Vec3& b) {
  const Vec3 ea = e * a;
  const Vec3 etb = e.transpose() * b;
  const double r = b.dot(ea);
  const double denom = ea.x() * ea.x() + ea.y() * ea.y() + etb.x() * etb.x() + etb.y() * etb.y();
  return denom > 0.0 ? std::abs(r) / std::sqrt(denom) : std::abs(r);
}

/// Rotation minimizing sum |b2 - R b1|^2 over unit bearings.
inline Mat3d fit_rotation(const std::vector<Vec3>& b1, const std::vector<Vec3>& b2) {
  Mat3d m = Mat3d::Zero();
  for (std::size_t i = 0; i < b1.size(); ++i) m += b2[i] * b1[i].transpose();
  Eigen::JacobiSVD<Mat3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3d d = Mat3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

inline double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

inline Mat3d skew(const Vec3& v) {
  Mat3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace detail

inline EssentialResult estimate_essential(const Correspondences& c, const CameraIntrinsics& cam,
                                          const VoOptions& opt = {}) {
  if (c.size() < 8) throw DomainError("insufficient correspondences");
  const std::size_t n = c.size();
  std::vector<Vec3> x1(n), x2(n), b1(n), b2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = detail::bearing(cam, c[i].uv);
    x2[i] = detail::bearing(cam, c[i].uv2);
    b1[i] = x1[i].normalized();
    b2[i] = x2[i].normalized();
  }

  EssentialResult result;
  const Mat3d r_only = detail::fit_rotation(b1, b2);
  std::vector<double> parallax(n);
  for (std::size_t i = 0; i < n; ++i)
    parallax[i] = std::atan2(b2[i].cross(r_only * b1[i]).norm(), b2[i].dot(r_only * b1[i]));
  result.median_parallax = detail::median(parallax);
  if (result.median_parallax < opt.low_parallax_rad) {
    result.low_parallax = true;
    result.rotation = r_only;
    result.inlier_mask.assign(n, true);
    return result;
  }

  const Mat3d t1 = detail::hartley_transform(x1);
  const Mat3d t2 = detail::hartley_transform(x2);

  auto score = [&](const Mat3d& e, std::vector<bool>& mask) {
    mask.assign(n, false);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::sampson_distance(e, x1[i], x2[i]) < opt.inlier_threshold) {
        mask[i] = true;
        ++count;
      }
    }
    return count;
  };

  Rng rng(opt.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> best_mask, mask;
  std::size_t best_count = 0;
  for (int it = 0; it < opt.ransac_iterations; ++it) {
    // partial Fisher-Yates for 8 distinct indices
    for (std::size_t k = 0; k < 8; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    std::vector<std::size_t> sample(order.begin(), order.begin() + 8);
    const auto fit = detail::solve_eight_point(x1, x2, sample, t1, t2, opt.degeneracy_ratio);
    if (fit.degenerate) continue;
    const std::size_t count = score(fit.E, mask);
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
    }
  }
  if (best_count < 8) throw DomainError("degenerate geometry");

  std::vector<std::size_t> inliers;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) inliers.push_back(i);
  const auto refit = detail::solve_eight_point(x1, x2, inliers, t1, t2, opt.degeneracy_ratio);
  if (refit.degenerate) throw DomainError("degenerate geometry");

  result.E = refit.E;
  score(result.E, result.inlier_mask);
  if (result.inlier_count() == 0) result.inlier_mask = best_mask;
  return result;
}

inline RecoveredPose recover_pose(const EssentialResult& e, const Correspondences& c,
                                  const CameraIntrinsics& cam) {
  RecoveredPose pose;
  pose.inlier_mask = e.inlier_mask;
  if (e.inlier_count() == 0) throw DomainError("no inliers");
  if (e.low_parallax) {
    pose.R = e.rotation;
    pose.low_parallax = true;
    pose.cheirality_count = static_cast<int>(e.inlier_count());
    return pose;
  }

  Eigen::JacobiSVD<Mat3d> svd(e.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3d u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  Mat3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const std::array<Mat3d, 2> rotations{u * w * v.transpose(), u * w.transpose() * v.transpose()};
  const Vec3 t = u.col(2).normalized();

  struct Candidate {
    Mat3d R;
    Vec3 t;
    int count = 0;
  };
  std::array<Candidate, 4> cands{{{rotations[0], t}, {rotations[0], -t}, {rotations[1], t}, {rotations[1], -t}}};
  for (auto& cand : cands) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!e.inlier_mask[i]) continue;
      const Vec3 a = detail::bearing(cam, c[i].uv);
      const Vec3 b = detail::bearing(cam, c[i].uv2);
      // lambda2 * b - lambda1 * R a = t
      Eigen::Matrix<double, 3, 2> m;
      m.col(0) = -(cand.R * a);
      m.col(1) = b;
      const Eigen::Vector2d lambda = (m.transpose() * m).ldlt().solve(m.transpose() * cand.t);
      if (lambda(0) > 0.0 && lambda(1) > 0.0) ++cand.count;
    }
  }
  const auto best = std::max_element(cands.begin(), cands.end(),
                                     [](const auto& a, const auto& b) { return a.count < b.count; });
  const auto ties = std::count_if(cands.begin(), cands.end(),
                                  [&](const auto& cand) { return cand.count == best->count; });
  if (ties > 1) throw DomainError("ambiguous pose");
  pose.R = best->R;
  pose.t_dir = best->t;
  pose.cheirality_count = best->count;
  return pose;
}

/// Metric translation length along t_dir from the depths of the inliers,
/// given the frame-to-frame rotation R (X_{t+1} = R X_t + t).
inline double resolve_scale_with_rotation(const Mat3d& r, const RecoveredPose& pose,
                                          const Correspondences& c, const CameraIntrinsics& cam,
                                          ScaleMode mode = ScaleMode::projection) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i < pose.inlier_mask.size() && !pose.inlier_mask[i]) continue;
    const Vec3 p = detail::bearing(cam, c[i].uv) * c[i].depth;
    const Vec3 q = detail::bearing(cam, c[i].uv2) * c[i].depth2;
    const Vec3 d = q - r * p;
    sum += mode == ScaleMode::projection ? d.dot(pose.t_dir) : d.norm();
    ++count;
  }
  if (count == 0) throw DomainError("no inliers for scale resolution");
  return sum / static_cast<double>(count);
}

inline double resolve_scale(const RecoveredPose& pose, const Correspondences& c,
                            const CameraIntrinsics& cam, ScaleMode mode = ScaleMode::projection) {
  return resolve_scale_with_rotation(pose.R, pose, c, cam, mode);
}

/// Gauss-Newton on the frame-t+1 reprojection error of the frame-t points
/// (X_{t+1} = R X_t + t), starting from (r0, 0). With `fix_rotation` only t
/// is solved. Depth noise moves a point along its own ray, which changes the
/// reprojection little, so this stays usable when the baseline is tiny.
inline std::pair<Mat3d, Vec3> refine_by_reprojection(const Mat3d& r0, const Correspondences& c,
                                                     const CameraIntrinsics& cam, bool fix_rotation,
                                                     int iterations = 10) {
  Mat3d r = r0;
  Vec3 t = Vec3::Zero();
  for (int it = 0; it < iterations; ++it) {
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& m : c) {
      const Vec3 rp = r * (detail::bearing(cam, m.uv) * m.depth);
      const Vec3 q = rp + t;
      if (q.z() <= 0.0) continue;
      const Vec3 b2 = detail::bearing(cam, m.uv2);
      const Eigen::Vector2d res(q.x() / q.z() - b2.x(), q.y() / q.z() - b2.y());
      Eigen::Matrix<double, 2, 3> dq;
      dq << 1.0 / q.z(), 0.0, -q.x() / (q.z() * q.z()), 0.0, 1.0 / q.z(), -q.y() / (q.z() * q.z());
      Eigen::Matrix<double, 2, 6> j;
      j.leftCols<3>() = -dq * detail::skew(rp);  // left perturbation R <- exp(w) R
      j.rightCols<3>() = dq;
      h += j.transpose() * j;
      g += j.transpose() * res;
    }
    Eigen::Matrix<double, 6, 1> step = Eigen::Matrix<double, 6, 1>::Zero();
    if (fix_rotation) {
      step.tail<3>() = -h.bottomRightCorner<3, 3>().ldlt().solve(g.tail<3>());
    } else {
      step = -h.ldlt().solve(g);
    }
    if (!step.allFinite()) throw DomainError("degenerate geometry");
    if (!fix_rotation && step.head<3>().norm() > 0.0)
      r = Eigen::AngleAxisd(step.head<3>().norm(), step.head<3>().normalized()).toRotationMatrix() * r;
    t += step.tail<3>();
    if (step.norm() < 1e-15) break;
  }
  return {r, t};
}

struct PlanarVoResult {
  Se2Params params;
  bool low_parallax = false;
  double scale = 0.0;
  std::size_t inliers = 0;
};

namespace detail {

inline PlanarVoResult to_planar(const Mat3d& r, const Vec3& t, const VoOptions& opt) {
  const Mat3d r_pose = r.transpose();
  if (out_of_plane_angle(r_pose) > opt.max_out_of_plane_deg * std::numbers::pi / 180.0)
    throw DomainError("non-planar motion");
  const Vec3 t_pose = -(r.transpose() * t);
  PlanarVoResult out;
  out.params = {-t_pose.x(), -t_pose.z(), yaw_of(r_pose)};
  return out;
}

}  // namespace detail

inline PlanarVoResult planar_vo_detailed(const Correspondences& c, const CameraIntrinsics& cam,
                                         const VoOptions& opt = {}) {
  const auto e = estimate_essential(c, cam, opt);
  const auto pose = recover_pose(e, c, cam);
  double scale = 0.0;
  PlanarVoResult out;
  if (!pose.low_parallax) {
    scale = resolve_scale(pose, c, cam, opt.scale_mode);
    out = detail::to_planar(pose.R, scale * pose.t_dir, opt);
  } else if (opt.low_parallax_translation == LowParallaxTranslation::reprojection) {
    const auto [r, t] = refine_by_reprojection(pose.R, c, cam, false);
    out = detail::to_planar(r, t, opt);
    scale = t.norm();
  } else {
    out = detail::to_planar(pose.R, Vec3::Zero(), opt);
  }
  out.low_parallax = pose.low_parallax;
  out.scale = scale;
  out.inliers = e.inlier_count();
  return out;
}

/// Essential matrix -> pose -> depth scale -> planar (xi_x, xi_z, theta).
inline Se2Params planar_vo(const Correspondences& c, const CameraIntrinsics& cam,
                           const VoOptions& opt = {}) {
  return planar_vo_detailed(c, cam, opt).params;
}

/// planar_vo with the ground-truth yaw substituted for the estimated rotation
/// in the scale step; the translation direction still comes from the images.
inline PlanarVoResult planar_vo_oracle_detailed(const Correspondences& c, const CameraIntrinsics& cam,
                                                double gt_theta, const VoOptions& opt = {}) {
  const auto e = estimate_essential(c, cam, opt);
  const auto pose = recover_pose(e, c, cam);
  const Mat3d r_gt = yaw_rotation(gt_theta).transpose();
  double scale = 0.0;
  Vec3 t = Vec3::Zero();
  if (!pose.low_parallax) {
    scale = resolve_scale_with_rotation(r_gt, pose, c, cam, opt.scale_mode);
    t = scale * pose.t_dir;
  } else if (opt.low_parallax_translation == LowParallaxTranslation::reprojection) {
    t = refine_by_reprojection(r_gt, c, cam, true).second;
    scale = t.norm();
  }
  const Vec3 t_pose = -(r_gt.transpose() * t);
  PlanarVoResult out;
  out.params = {-t_pose.x(), -t_pose.z(), gt_theta};
  out.low_parallax = pose.low_parallax;
  out.scale = scale;
  out.inliers = e.inlier_count();
  return out;
}

inline Se2Params planar_vo_oracle(const Correspondences& c, const CameraIntrinsics& cam,
                                  double gt_theta, const VoOptions& opt = {}) {
  return planar_vo_oracle_detailed(c, cam, gt_theta, opt).params;
}

/// Projects camera-frame points of frame t into both frames. Points behind
/// either camera or outside either image are dropped. Depths are exact.
inline Correspondences project_landmarks(const std::vector<Vec3>& points_t, const CameraMotion& motion,
                                         const CameraIntrinsics& cam) {
  Correspondences out;
  for (const auto& p : points_t) {
    const Vec3 q = motion.R * p + motion.t;
    if (p.z() <= 0.0 || q.z() <= 0.0) continue;
    const Eigen::Vector2d a = cam.project(p), b = cam.project(q);
    if (!cam.contains(a) || !cam.contains(b)) continue;
    out.push_back({a, b, p.z(), q.z()});
  }
  return out;
}

}  // namespace pgvo
