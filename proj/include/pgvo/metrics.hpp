#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "pgvo/action.hpp"
#include "pgvo/error.hpp"
#include "pgvo/losses.hpp"

namespace pgvo {

inline constexpr double kSuccessDistance = 0.36;  // 2 x agent radius

/// 1 iff the episode ended with an explicit stop closer than `threshold`.
inline int success(double d_g, bool stopped, double threshold = kSuccessDistance) {
  if (!(d_g >= 0.0)) throw UsageError("d_g must be non-negative");
  return stopped && d_g < threshold ? 1 : 0;
}

/// l / max(l_a, l); 1 for a zero-length optimal episode.
inline double path_efficiency(double l, double l_a) {
  if (!(l >= 0.0) || !(l_a >= 0.0)) throw UsageError("path lengths must be non-negative");
  const double denom = std::max(l_a, l);
  return denom > 0.0 ? l / denom : 1.0;
}

inline double spl(int s, double l, double l_a) {
  const double eff = path_efficiency(l, l_a);
  return s ? eff : 0.0;
}

/// (1 - d_g / d_init) * l / max(l_a, l). Negative when the agent ends farther
/// away than it started unless `clamp` is set.
inline double soft_spl(double d_init, double d_g, double l, double l_a, bool clamp = false) {
  if (!(d_init > 0.0)) throw UsageError("degenerate episode");
  if (!(d_g >= 0.0)) throw UsageError("d_g must be non-negative");
  double progress = 1.0 - d_g / d_init;
  if (clamp) progress = std::max(progress, 0.0);
  return progress * path_efficiency(l, l_a);
}

struct NavMetrics {
  int success = 0;
  double spl = 0.0;
  double soft_spl = 0.0;
  double d_g = 0.0;
  double d_init = 0.0;
  double path_length = 0.0;
  double shortest_length = 0.0;
  bool stopped = false;
};

inline NavMetrics nav_metrics(double d_init, double d_g, double shortest_length, double path_length,
                              bool stopped, double threshold = kSuccessDistance) {
  NavMetrics m;
  m.d_init = d_init;
  m.d_g = d_g;
  m.shortest_length = shortest_length;
  m.path_length = path_length;
  m.stopped = stopped;
  m.success = success(d_g, stopped, threshold);
  m.spl = spl(m.success, shortest_length, path_length);
  m.soft_spl = d_init > 0.0 ? soft_spl(d_init, d_g, shortest_length, path_length) : (m.success ? 1.0 : 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// VO error diagnostics

/// Mean absolute error per component (xi_x, xi_z, theta).
struct ComponentErrors {
  double xi_x = 0.0;
  double xi_z = 0.0;
  double theta = 0.0;
  std::size_t count = 0;

  double operator[](std::size_t i) const { return i == 0 ? xi_x : (i == 1 ? xi_z : theta); }
};

struct VoErrorReport {
  ComponentErrors overall;
  std::array<std::optional<ComponentErrors>, 3> per_action;  // indexed by action_index

  const std::optional<ComponentErrors>& for_action(Action a) const { return per_action[action_index(a)]; }
};

namespace detail {

struct ErrorAccumulator {
  std::array<double, 3> sum{};
  std::size_t n = 0;

  void add(const Se2Params& a, const Se2Params& b) {
    for (std::size_t k = 0; k < 3; ++k) sum[k] += std::abs(a[k] - b[k]);
    ++n;
  }
  ComponentErrors mean() const {
    if (n == 0) return {};
    const double d = static_cast<double>(n);
    return {sum[0] / d, sum[1] / d, sum[2] / d, n};
  }
};

}  // namespace detail

inline VoErrorReport per_step_vo_error(const std::vector<Se2Params>& preds, const std::vector<Se2Params>& gts,
                                       const std::vector<Action>& actions) {
  if (preds.size() != gts.size() || preds.size() != actions.size())
    throw UsageError("per_step_vo_error: length mismatch");
  detail::ErrorAccumulator all;
  std::array<detail::ErrorAccumulator, 3> by_action;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    all.add(preds[i], gts[i]);
    by_action[action_index(actions[i])].add(preds[i], gts[i]);
  }
  VoErrorReport r;
  r.overall = all.mean();
  for (std::size_t a = 0; a < 3; ++a)
    if (by_action[a].n > 0) r.per_action[a] = by_action[a].mean();
  return r;
}

/// Error of the constant predictor that outputs each action's training mean.
inline VoErrorReport sys_error(const std::vector<Se2Params>& train_gts, const std::vector<Action>& train_actions,
                               const std::vector<Se2Params>& val_gts, const std::vector<Action>& val_actions) {
  if (train_gts.size() != train_actions.size() || val_gts.size() != val_actions.size())
    throw UsageError("sys_error: length mismatch");
  std::array<std::array<double, 3>, 3> sum{};
  std::array<std::size_t, 3> n{};
  for (std::size_t i = 0; i < train_gts.size(); ++i) {
    const std::size_t a = action_index(train_actions[i]);
    for (std::size_t k = 0; k < 3; ++k) sum[a][k] += train_gts[i][k];
    ++n[a];
  }
  std::vector<Se2Params> preds;
  preds.reserve(val_gts.size());
  for (Action act : val_actions) {
    const std::size_t a = action_index(act);
    if (n[a] == 0) throw UsageError("sys_error: no training samples for action " + to_string(act));
    const double d = static_cast<double>(n[a]);
    preds.push_back({sum[a][0] / d, sum[a][1] / d, sum[a][2] / d});
  }
  return per_step_vo_error(preds, val_gts, val_actions);
}

}  // namespace pgvo
