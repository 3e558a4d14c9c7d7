// keyloco: staged training / distillation / evaluation / plotting driver.
//
// Exit codes: 0 success, 2 config error, 3 step budget exhausted before the
// stage gate, 4 missing or mismatched input artifact.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "keyloco/pipeline/manifest.hpp"
#include "keyloco/pipeline/stages.hpp"
#include "keyloco/version.hpp"

namespace {

using keyloco::pipeline::ArtifactError;
using keyloco::pipeline::ConfigError;
using keyloco::pipeline::PipelineConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitArtifact = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config (JSON)")->required();
  cmd->add_option("--out", opts.out_dir, "output directory override");
  cmd->add_option("--seed", opts.seed, "root seed override");
}

PipelineConfig load_config(const CommonOpts& opts) {
  PipelineConfig cfg = PipelineConfig::load(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.seed = static_cast<uint64_t>(opts.seed);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keyloco: hierarchical loco-manipulation training pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", keyloco::kVersion);

  CommonOpts opts;
  std::string teacher_path, tracker_path, ckpt_path, task_override, interface = "keypoint";
  std::string csv_path, x_column, out_svg;
  std::vector<std::string> y_columns;
  bool resume = false, no_noise = false, no_clip = false, blind = false;
  int rollouts = -1, seeds = -1;

  auto* s1 = app.add_subcommand("train-motion-teacher",
                                "Stage 1: PPO privileged motion tracker");
  add_common(s1, opts);
  s1->add_flag("--resume", resume, "continue from an existing checkpoint");

  auto* s2 = app.add_subcommand("distill-keypoint-tracker",
                                "Stage 2: DAgger teacher -> keypoint tracker");
  add_common(s2, opts);
  s2->add_option("--teacher", teacher_path, "stage-1 checkpoint")->required();
  s2->add_flag("--no-noise", no_noise, "disable command noise (ablation)");

  auto* s3 = app.add_subcommand("train-task-teacher",
                                "Stage 3: PPO state-based task policy");
  add_common(s3, opts);
  s3->add_option("--tracker", tracker_path, "stage-2 checkpoint")->required();
  s3->add_option("--task", task_override, "task name override");
  s3->add_flag("--no-clip", no_clip, "disable HMS command clipping (ablation)");
  s3->add_option("--interface", interface, "high-level interface: keypoint|flat")
      ->check(CLI::IsMember({"keypoint", "flat"}));

  auto* s4 = app.add_subcommand("distill-vision-student",
                                "Stage 4: DAgger state teacher -> depth student");
  add_common(s4, opts);
  s4->add_option("--teacher", teacher_path, "stage-3 checkpoint")->required();
  s4->add_option("--tracker", tracker_path, "stage-2 checkpoint")->required();
  s4->add_option("--task", task_override, "task name override");
  s4->add_flag("--blind", blind, "train the no-vision control student");

  auto* ev = app.add_subcommand("eval", "Rollout metrics for a task checkpoint");
  add_common(ev, opts);
  ev->add_option("--ckpt", ckpt_path, "task policy checkpoint")->required();
  ev->add_option("--tracker", tracker_path, "stage-2 checkpoint")->required();
  ev->add_option("--task", task_override, "task name override");
  ev->add_option("--rollouts", rollouts, "rollouts per seed");
  ev->add_option("--seeds", seeds, "number of seeds");

  auto* pl = app.add_subcommand("plot", "Training-curve SVG from a stage log CSV");
  pl->add_option("--csv", csv_path, "input CSV")->required();
  pl->add_option("--x", x_column, "x-axis column")->required();
  pl->add_option("--y", y_columns, "y columns")->required()->delimiter(',');
  pl->add_option("--svg", out_svg, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (pl->parsed()) {
      keyloco::pipeline::plot_csv(csv_path, x_column, y_columns, out_svg);
      std::printf("wrote %s\n", out_svg.c_str());
      return kExitOk;
    }

    PipelineConfig cfg = load_config(opts);
    if (no_noise) cfg.inject_noise = false;
    if (no_clip) cfg.clip_commands = false;
    if (!task_override.empty()) cfg.task = keyloco::task_from_name(task_override);
    if (rollouts > 0) cfg.eval_rollouts = rollouts;
    if (seeds > 0) cfg.eval_seeds = seeds;

    if (s1->parsed()) {
      auto r = keyloco::pipeline::train_motion_teacher(cfg, resume);
      std::printf("stage 1: eval_error=%.4f m gate=%s checkpoint=%s\n",
                  r.final_metric, r.gate_passed ? "passed" : "budget-exhausted",
                  r.checkpoint.c_str());
      return r.gate_passed ? kExitOk : kExitBudget;
    }
    if (s2->parsed()) {
      auto r = keyloco::pipeline::distill_keypoint_tracker(cfg, teacher_path);
      std::printf("stage 2: heldout/initial MSE ratio=%.4f checkpoint=%s\n",
                  r.final_metric, r.checkpoint.c_str());
      return kExitOk;
    }
    if (s3->parsed()) {
      auto iface = interface == "flat"
                       ? keyloco::envs::TaskEnvConfig::Interface::kFlat
                       : keyloco::envs::TaskEnvConfig::Interface::kKeypoint;
      auto r = keyloco::pipeline::train_task_teacher(cfg, tracker_path, iface);
      std::printf("stage 3: final_return=%.4f checkpoint=%s\n", r.final_metric,
                  r.checkpoint.c_str());
      return kExitOk;
    }
    if (s4->parsed()) {
      auto r = keyloco::pipeline::distill_vision_student(cfg, teacher_path,
                                                         tracker_path, blind);
      std::printf("stage 4: heldout/initial MSE ratio=%.4f checkpoint=%s\n",
                  r.final_metric, r.checkpoint.c_str());
      return kExitOk;
    }
    if (ev->parsed()) {
      auto r = keyloco::pipeline::evaluate_checkpoint(cfg, ckpt_path, tracker_path);
      std::printf("%s", r.csv_text.c_str());
      std::printf("wrote %s\n", r.csv_path.c_str());
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ArtifactError& e) {
    std::fprintf(stderr, "artifact error: %s\n", e.what());
    return kExitArtifact;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
