#pragma once

#include <string>
#include <vector>

#include "keyloco/envs/task_env.hpp"
#include "keyloco/nn/checkpoint.hpp"
#include "keyloco/pipeline/config.hpp"

namespace keyloco::pipeline {

struct StageResult {
  bool gate_passed = true;     // stage-1 gate; false maps to exit code 3
  std::string checkpoint;      // primary output artifact
  std::string log_csv;
  std::string manifest;
  double final_metric = 0.0;   // stage-specific headline number
};

// Stage 1: PPO teacher motion tracker (privileged obs + future goal window).
// Trains until the held-out stand+walk gate passes or the step budget runs
// out; gate_passed reports which. Resumable from its own checkpoint.
StageResult train_motion_teacher(const PipelineConfig& cfg, bool resume = false);

// Stage 2: DAgger the teacher into the keypoint tracker (proprio + noised
// command). Freezes command NormalizerStats into the checkpoint.
// final_metric = final held-out MSE / iteration-0 held-out MSE.
StageResult distill_keypoint_tracker(const PipelineConfig& cfg,
                                     const std::string& teacher_ckpt);

// Stage 3: PPO the high-level task policy over the frozen tracker.
// final_metric = mean episode return over the last 10 iterations.
StageResult train_task_teacher(const PipelineConfig& cfg,
                               const std::string& tracker_ckpt,
                               envs::TaskEnvConfig::Interface interface =
                                   envs::TaskEnvConfig::Interface::kKeypoint);

// Stage 4: DAgger the state teacher into the depth (or blind) student.
StageResult distill_vision_student(const PipelineConfig& cfg,
                                   const std::string& task_teacher_ckpt,
                                   const std::string& tracker_ckpt, bool blind);

// Rollouts with the deterministic mean policy; one Table-shaped summary row.
// Returns the CSV text that was written to <out_dir>/eval_<task>.csv.
struct EvalResult {
  std::string csv_path;
  std::string csv_text;
  tasks::MetricsSummary summary;
};
EvalResult evaluate_checkpoint(const PipelineConfig& cfg, const std::string& ckpt,
                               const std::string& tracker_ckpt);

// Training-curve SVG from a stage log CSV (golden-file comparable output).
void plot_csv(const std::string& csv_path, const std::string& x_column,
              const std::vector<std::string>& y_columns,
              const std::string& out_svg);

// Checkpoint plumbing shared by stages and tests.
nn::Mlp<float> mlp_from_checkpoint(const nn::Checkpoint& ck, const std::string& prefix);
nn::Checkpoint load_artifact(const std::string& path);  // throws ArtifactError
hms::HmsBounds bounds_from_tracker(const nn::Checkpoint& tracker_ckpt);

}  // namespace keyloco::pipeline
