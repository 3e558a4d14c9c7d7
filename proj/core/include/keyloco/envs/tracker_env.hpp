#pragma once

#include <array>
#include <memory>
#include <vector>

#include "keyloco/hms/guard.hpp"
#include "keyloco/motion/reference.hpp"
#include "keyloco/reward/motion_reward.hpp"
#include "keyloco/rl/env.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::envs {

// Distillation environment: a student-observation env that can also report the
// teacher's observation for the same state, so a teacher policy can label
// student rollouts.
class DistillEnv : public rl::Env {
 public:
  virtual const rl::ObsVec& teacher_obs() = 0;
};

// Shared proprioception layout, 53 floats:
//   root z (1), root lin vel (3), yaw rate (1),
//   effector offsets from root (15), effector vel relative to root (15),
//   previous normalized action (18).
inline constexpr int kProprioDim = 1 + 3 + 1 + 15 + 15 + kCommandDim;

// Writes the 53-float proprio block. prev_action is the acting policy's
// previous output in its own units.
void fill_proprio(const sim::PuppetState& state,
                  const std::array<double, kCommandDim>& prev_action, float* out);

struct TrackerEnvConfig {
  enum class Mode { kTeacher, kStudent };
  Mode mode = Mode::kTeacher;

  // Student-mode options.
  bool inject_noise = true;     // multiplicative U(0.5, 1.5) on the command
  bool collect_stats = false;   // Welford stats on the observed command
  bool stats_on_raw = false;    // alternative: stats on the pre-noise command
  double command_lookahead = 0.02;  // command targets the next control frame

  // Per-episode motion distribution (ignored when fixed_motions is set).
  double min_duration = 3.0, max_duration = 6.0;
  double max_speed = 1.4;
  double max_heading = 0.6;  // radians, walk heading range

  // Termination: sustained mean effector error.
  double error_limit = 1.0;     // metres
  double error_window = 1.0;    // seconds

  sim::SimConfig sim;
};

// Motion-tracking environment. Teacher mode exposes privileged contacts plus a
// 2 s future goal window; student mode exposes only the 18-dim keypoint
// command (optionally noised).
class TrackerEnv : public DistillEnv {
 public:
  // fixed_motions, when non-empty, is cycled deterministically by episode
  // index (held-out evaluation); otherwise motions are sampled per episode.
  TrackerEnv(const TrackerEnvConfig& cfg, Rng rng,
             std::vector<motion::ReferenceMotion> fixed_motions = {});

  static constexpr int kTeacherObsDim =
      kProprioDim + (kNumEffectors + 2) + motion::TeacherGoal::kDim;  // 250
  static constexpr int kStudentObsDim = kProprioDim + kCommandDim;    // 71

  int obs_dim() const override;
  int act_dim() const override { return kCommandDim; }
  void reset() override;
  const rl::ObsVec& obs() const override { return obs_; }
  rl::StepResult step(const std::vector<float>& action) override;
  void clip_action(std::vector<float>& action) const override;
  Rng& rng() override { return rng_; }
  const rl::ObsVec& teacher_obs() override;

  // Introspection for tests and metrics.
  const sim::PuppetState& state() const { return state_; }
  const motion::ReferenceMotion& motion() const { return motion_; }
  double time() const { return t_; }
  double mean_effector_error() const;
  const hms::NormalizerStats& stats() const { return stats_; }
  hms::NormalizerStats& stats() { return stats_; }
  const motion::KeypointCommand& last_command() const { return command_; }
  int episodes_started() const { return episode_; }

 private:
  void sample_motion();
  void build_obs();

  TrackerEnvConfig cfg_;
  Rng rng_;
  std::vector<motion::ReferenceMotion> fixed_motions_;
  motion::ReferenceMotion motion_;
  sim::PuppetState state_;
  std::vector<sim::SceneObject> objects_;  // empty; tracker trains object-free
  sim::ContactReport contacts_;
  motion::KeypointCommand command_;  // as observed (after optional noise)
  std::array<double, kCommandDim> prev_action_{};
  hms::NormalizerStats stats_;
  rl::ObsVec obs_;
  rl::ObsVec teacher_obs_;
  double t_ = 0.0;
  int episode_ = 0;
  int error_steps_ = 0;
  bool episode_done_ = true;
};

}  // namespace keyloco::envs
