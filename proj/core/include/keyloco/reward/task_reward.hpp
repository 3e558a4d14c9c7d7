#pragma once

#include <vector>

#include "keyloco/motion/reference.hpp"
#include "keyloco/reward/motion_reward.hpp"
#include "keyloco/reward/terms.hpp"
#include "keyloco/sim/scene.hpp"
#include "keyloco/sim/types.hpp"
#include "keyloco/task_id.hpp"

namespace keyloco::reward {

struct TaskRewardBreakdown {
  double approach = 0.0;
  double forward = 0.0;
  double force = 0.0;
  double look = 0.0;
  double drift = 0.0;
  double height = 0.0;
  double velocity = 0.0;
  double pause = 0.0;
  double total = 0.0;
};

// Weights and F_des per task. large_kick turns the kick_box reward into its
// force-thresholded variant.
RewardConfig default_reward_config(TaskId task, bool large_kick = false);

// binary_cmd=1: weighted task terms; binary_cmd=0: pause (stand-tracking) term only.
TaskRewardBreakdown task_reward(TaskId task, const RewardConfig& rc,
                                const sim::PuppetState& state,
                                const std::vector<sim::SceneObject>& objects,
                                const sim::SceneSpec& scene,
                                RunningExtrema& extrema, int binary_cmd,
                                const motion::RefFrame& pause_ref);

}  // namespace keyloco::reward
