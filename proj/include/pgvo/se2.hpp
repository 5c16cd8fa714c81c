#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace pgvo {

/// Planar vector in the agent's ground plane. Component 0 is x (lateral),
/// component 1 is z (longitudinal, forward motion is -z).
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double rad) {
  double r = std::remainder(rad, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

inline Mat2 rotation2(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/**
 * Rigid planar transform H = [R(theta) xi; 0 1].
 *
 * Frames follow the ground-plane convention used everywhere in this library:
 * x points to the agent's left, z points backward, so moving forward gives
 * negative z and a positive theta is a counter-clockwise (left) turn seen
 * from above.
 *
 * theta is kept in (-pi, pi] after every operation.
 */
class Se2 {
 public:
  Se2() = default;
  Se2(double theta, Vec2 xi) : theta_(normalize_angle(theta)), xi_(std::move(xi)) {}
  Se2(double theta, double xi_x, double xi_z) : Se2(theta, Vec2(xi_x, xi_z)) {}

  static Se2 identity() { return {}; }

  /// Reads theta with atan2 from the rotation block; the bottom row is ignored.
  static Se2 from_matrix(const Mat3& m) {
    return {std::atan2(m(1, 0), m(0, 0)), Vec2(m(0, 2), m(1, 2))};
  }

  double theta() const { return theta_; }
  const Vec2& xi() const { return xi_; }
  double x() const { return xi_.x(); }
  double z() const { return xi_.y(); }

  Mat2 rotation() const { return rotation2(theta_); }

  Mat3 matrix() const {
    Mat3 m = Mat3::Identity();
    m.topLeftCorner<2, 2>() = rotation();
    m.topRightCorner<2, 1>() = xi_;
    return m;
  }

  /// this * other, i.e. apply `other` first.
  Se2 compose(const Se2& other) const {
    return {theta_ + other.theta_, rotation() * other.xi_ + xi_};
  }

  Se2 inverse() const { return {-theta_, -(rotation().transpose() * xi_)}; }

  /// R(theta) * p + xi
  Vec2 apply(const Vec2& p) const { return rotation() * p + xi_; }

  Se2 operator*(const Se2& other) const { return compose(other); }
  Vec2 operator*(const Vec2& p) const { return apply(p); }

 private:
  double theta_ = 0.0;
  Vec2 xi_ = Vec2::Zero();
};

inline Se2 compose(const Se2& a, const Se2& b) { return a.compose(b); }
inline Se2 inverse(const Se2& a) { return a.inverse(); }
inline Vec2 apply(const Se2& h, const Vec2& p) { return h.apply(p); }

/// Goal update v_{t+1} = H * v_t, where H maps coordinates of frame t into
/// frame t+1. For a relative motion m (pose of frame t+1 in frame t) the
/// coordinate change is m.inverse().
inline Vec2 update_goal(const Vec2& goal, const Se2& h) { return h.apply(goal); }

/// Cumulative poses in the start frame. Element 0 is the identity and
/// element k is steps[0] * ... * steps[k-1].
inline std::vector<Se2> integrate(const std::vector<Se2>& steps) {
  std::vector<Se2> poses;
  poses.reserve(steps.size() + 1);
  poses.push_back(Se2::identity());
  for (const auto& s : steps) poses.push_back(poses.back() * s);
  return poses;
}

struct PolarGoal {
  double magnitude = 0.0;
  Vec2 unit = Vec2::Zero();
};

inline PolarGoal polar_goal_encoding(const Vec2& goal) {
  const double n = goal.norm();
  if (n > 0.0) return {n, goal / n};
  return {};
}

}  // namespace pgvo
