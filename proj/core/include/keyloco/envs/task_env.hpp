#pragma once

#include <array>
#include <memory>
#include <vector>

#include "keyloco/depth/camera.hpp"
#include "keyloco/envs/tracker_env.hpp"
#include "keyloco/hms/guard.hpp"
#include "keyloco/nn/mlp.hpp"
#include "keyloco/reward/task_reward.hpp"
#include "keyloco/sim/scene.hpp"
#include "keyloco/task_id.hpp"
#include "keyloco/tasks/metrics.hpp"

namespace keyloco::envs {

struct TaskEnvConfig {
  TaskId task = TaskId::kPushBox;
  bool large_kick = false;

  // High-level action interface.
  enum class Interface { kKeypoint, kFlat };
  Interface interface = Interface::kKeypoint;

  // Observation mode. kState is the task teacher; kVision/kBlind are students.
  enum class ObsMode { kState, kVision, kBlind };
  ObsMode obs_mode = ObsMode::kState;

  bool clip_commands = true;  // HMS clip on keypoint commands (ablation switch)
  hms::HmsBounds bounds;

  double episode_length = 60.0;
  int low_steps_per_tick = 5;  // high level at 10 Hz over a 50 Hz tracker
  double p_execute = 0.5;      // binary command: P(execute) per episode

  bool perturb_camera = true;
  bool augment_masks = true;
  depth::CameraSpec camera;
  depth::MaskAugmentConfig masks;

  sim::SimConfig sim;
};

// Loco-manipulation environment: a high-level policy emits an 18-dim keypoint
// command (or a flat low-level action, ablation) at 10 Hz; a frozen tracker
// converts commands to low-level actions at 50 Hz.
class TaskEnv : public DistillEnv {
 public:
  static constexpr int kObjectObsDim = 14;
  static constexpr int kStateObsDim = kProprioDim + kObjectObsDim + 1;  // 68

  // tracker: frozen student tracker mean network (71 -> 18), ignored for the
  // flat interface.
  TaskEnv(const TaskEnvConfig& cfg, nn::Mlp<float> tracker, Rng rng);

  int obs_dim() const override;
  int act_dim() const override { return kCommandDim; }
  void reset() override;
  const rl::ObsVec& obs() const override { return obs_; }
  rl::StepResult step(const std::vector<float>& action) override;
  // Keypoint interface + clip_commands: project onto the HMS box.
  // Flat interface: clamp to the normalized action range.
  void clip_action(std::vector<float>& action) const override;
  Rng& rng() override { return rng_; }
  const rl::ObsVec& teacher_obs() override;

  const sim::PuppetState& state() const { return state_; }
  const std::vector<sim::SceneObject>& objects() const { return objects_; }
  int binary_cmd() const { return binary_cmd_; }
  double time() const { return t_; }
  const sim::SceneSpec& scene() const { return scene_; }
  const depth::CameraSpec& camera() const { return camera_; }
  const reward::TaskRewardBreakdown& last_reward() const { return last_reward_; }

  // Attach to record one row per 50 Hz control step for the current episode.
  void set_trajectory_log(tasks::TrajectoryLog* log) { log_ = log; }

  int64_t render_calls() const { return render_calls_; }
  int64_t augment_calls() const { return augment_calls_; }

 private:
  void build_obs();
  void build_state_obs(rl::ObsVec& out);

  TaskEnvConfig cfg_;
  nn::Mlp<float> tracker_;
  nn::Mlp<float>::Cache tracker_cache_;
  Rng rng_;
  sim::SceneSpec scene_;
  sim::PuppetState state_;
  std::vector<sim::SceneObject> objects_;
  sim::ContactReport contacts_;
  reward::RewardConfig reward_cfg_;
  reward::RunningExtrema extrema_;
  motion::RefFrame pause_ref_;
  reward::TaskRewardBreakdown last_reward_;
  depth::CameraSpec camera_;
  std::array<double, kCommandDim> prev_hl_action_{};   // high-level units
  std::array<double, kCommandDim> prev_low_action_{};  // tracker output
  rl::ObsVec obs_;
  rl::ObsVec teacher_obs_;
  tasks::TrajectoryLog* log_ = nullptr;
  int binary_cmd_ = 1;
  double t_ = 0.0;
  int64_t render_calls_ = 0;
  int64_t augment_calls_ = 0;
};

}  // namespace keyloco::envs
