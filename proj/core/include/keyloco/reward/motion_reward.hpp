#pragma once

#include <array>
#include <cmath>

#include "keyloco/math.hpp"
#include "keyloco/motion/reference.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::reward {

struct MotionRewardConfig {
  double w_root_pos = 1.0, k_root_pos = 5.0;
  double w_root_vel = 0.5, k_root_vel = 1.0;
  double w_effector = 0.6, k_effector = 3.0;  // per effector
  double w_action_rate = 0.02;
  double w_slip = 0.05;

  double max_track() const { return w_root_pos + w_root_vel + kNumEffectors * w_effector; }
};

struct MotionRewardBreakdown {
  double track = 0.0;
  double penalty = 0.0;
  double total() const { return track + penalty; }
};

// r_motion = r_track + r_penalty, world-frame Gaussian tracking kernels plus
// action-rate and foot-slip penalties. Actions are in normalized [-1,1] units.
inline MotionRewardBreakdown r_motion(const sim::PuppetState& state,
                                      const motion::RefFrame& ref,
                                      const Vec3& ref_root_vel,
                                      const std::array<double, kCommandDim>& action,
                                      const std::array<double, kCommandDim>& prev_action,
                                      const sim::ContactReport& contacts,
                                      const MotionRewardConfig& cfg = {}) {
  MotionRewardBreakdown out;
  out.track += cfg.w_root_pos *
               std::exp(-cfg.k_root_pos * (state.root_pos - ref.root_pos).norm2());
  out.track += cfg.w_root_vel *
               std::exp(-cfg.k_root_vel * (state.root_lin_vel - ref_root_vel).norm2());
  for (int i = 0; i < kNumEffectors; ++i) {
    out.track += cfg.w_effector *
                 std::exp(-cfg.k_effector *
                          (state.effector_pos[i] - ref.effector_pos[i]).norm2());
  }

  double rate2 = 0.0;
  for (int j = 0; j < kCommandDim; ++j) rate2 += sq(action[j] - prev_action[j]);
  out.penalty -= cfg.w_action_rate * rate2;

  double slip = 0.0;
  if (contacts.foot_ground_contact[0]) slip += state.effector_vel[kLeftFoot].norm_xy();
  if (contacts.foot_ground_contact[1]) slip += state.effector_vel[kRightFoot].norm_xy();
  out.penalty -= cfg.w_slip * slip;
  return out;
}

}  // namespace keyloco::reward
