#pragma once

#include <cmath>

#include "keyloco/math.hpp"

namespace keyloco::reward {

struct RewardConfig {
  double approach_scale = 0.1;  // per meter
  double forward_gain = 10.0;   // per meter
  double force_scale = 0.1;     // per newton
  double drift_gain = 10.0;     // per meter
  double f_des = 0.0;           // N, per task

  // Per-task term weights.
  double w_approach = 1.0;
  double w_forward = 2.0;
  double w_force = 0.5;
  double w_look = 0.1;
  double w_drift = 1.0;
  double w_height = 2.0;  // lift
  double w_vel = 1.0;     // reach
};

// Forward/lateral extrema of the tracked object over the episode so far.
struct RunningExtrema {
  double max_forward = 0.0;
  double max_abs_lateral = 0.0;

  void reset(double x_obj, double y_obj) {
    max_forward = x_obj;
    max_abs_lateral = std::abs(y_obj);
  }
};

inline double r_approach_single(double d, const RewardConfig& rc = {}) {
  return std::exp(-rc.approach_scale * d);
}

// Harmonic mean of the two single-point rewards.
inline double r_approach_pair(double d1, double d2, const RewardConfig& rc = {}) {
  double a = std::exp(-rc.approach_scale * d1);
  double b = std::exp(-rc.approach_scale * d2);
  return 2.0 * a * b / (a + b);
}

// Rewards only new forward progress; updates the extremum afterward.
inline double r_forward(double x_obj, RunningExtrema& extrema,
                        const RewardConfig& rc = {}) {
  double progress = std::max(0.0, x_obj - extrema.max_forward);
  double r = std::tanh(rc.forward_gain * progress);
  extrema.max_forward = std::max(extrema.max_forward, x_obj);
  return r;
}

inline double r_force(double f_obj, double f_des, const RewardConfig& rc = {}) {
  double deficit = std::max(0.0, f_des - f_obj);
  return std::exp(-rc.force_scale * deficit);
}

// -(angle between facing and object direction)^2; degenerate direction -> 0.
inline double r_look(const Vec3& f_body, const Vec3& d_obj, bool* degenerate = nullptr) {
  if (degenerate) *degenerate = false;
  Vec3 f = f_body.normalized();
  Vec3 d = d_obj.normalized();
  if (f.norm2() < 0.5 || d.norm2() < 0.5) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  double c = clamp(f.dot(d), -1.0, 1.0);
  return -sq(std::acos(c));
}

inline double r_drift(double y_obj, RunningExtrema& extrema,
                      const RewardConfig& rc = {}) {
  double excursion = std::max(0.0, std::abs(y_obj) - extrema.max_abs_lateral);
  double r = -std::tanh(rc.drift_gain * excursion);
  extrema.max_abs_lateral = std::max(extrema.max_abs_lateral, std::abs(y_obj));
  return r;
}

}  // namespace keyloco::reward
