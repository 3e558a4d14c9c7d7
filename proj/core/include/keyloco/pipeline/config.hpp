#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "keyloco/depth/camera.hpp"
#include "keyloco/distill/dagger.hpp"
#include "keyloco/envs/task_env.hpp"
#include "keyloco/envs/tracker_env.hpp"
#include "keyloco/rl/ppo.hpp"
#include "keyloco/sim/types.hpp"
#include "keyloco/task_id.hpp"

namespace keyloco::pipeline {

// Bad or unknown config content; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or mismatched input artifact; the CLI maps this to exit code 4.
struct ArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full experiment schema (JSON on disk). Unknown keys are rejected; every
// field has a default so a minimal config is `{}`.
struct PipelineConfig {
  std::string out_dir = "out";
  uint64_t seed = 1;

  sim::SimConfig sim;

  rl::PpoConfig ppo_tracker;  // stage 1
  rl::PpoConfig ppo_task;     // stage 3

  distill::DistillConfig distill_tracker;  // stage 2
  distill::DistillConfig distill_vision;   // stage 4

  // Procedural motion distribution (stages 1 and 2).
  double motion_min_duration = 3.0;
  double motion_max_duration = 6.0;
  double motion_max_speed = 1.4;
  double motion_max_heading = 0.6;

  // HMS options.
  bool inject_noise = true;
  bool stats_on_raw = false;
  bool clip_commands = true;

  depth::MaskAugmentConfig masks;
  bool augment_masks = true;
  bool perturb_camera = true;

  TaskId task = TaskId::kPushBox;
  bool large_kick = false;
  double episode_length = 60.0;
  double p_execute = 0.5;

  // Optional per-task reward overrides (negative = use task default).
  double reward_f_des = -1.0;
  double reward_w_forward = -1.0;

  // Stage-1 gate: mean per-effector tracking error on held-out stand+walk.
  double stage1_gate_error = 0.15;  // metres
  int stage1_eval_motions = 8;
  int stage1_eval_interval = 10;  // PPO iterations between gate evaluations

  int eval_rollouts = 16;
  int eval_seeds = 3;

  static PipelineConfig load(const std::string& path);     // throws ConfigError
  static PipelineConfig from_json_text(const std::string& text);
  std::string canonical_json() const;
  uint64_t hash() const;  // FNV-1a over canonical_json()
};

}  // namespace keyloco::pipeline
