// Acceptance gate, criterion 9: stage-1 teacher training at desk scale.
// The teacher motion tracker must reach a mean per-effector tracking error
// of <= 15 cm on held-out stand+walk motions within 2e6 env steps.

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "keyloco/pipeline/config.hpp"
#include "keyloco/pipeline/stages.hpp"

using namespace keyloco;
namespace fs = std::filesystem;

int main() {
  auto cfg = pipeline::PipelineConfig::from_json_text(R"({
    "seed": 7,
    "ppo_tracker": {"num_envs": 64, "horizon": 64, "hidden": 128,
                     "total_env_steps": 2000000},
    "stage1": {"eval_motions": 8, "eval_interval": 20}
  })");
  cfg.out_dir = (fs::temp_directory_path() / "keyloco_acc_stage1").string();
  fs::remove_all(cfg.out_dir);

  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  double err = -1.0;
  std::string detail;
  try {
    auto res = pipeline::train_motion_teacher(cfg);
    ok = res.gate_passed;
    err = res.final_metric;
  } catch (const std::exception& e) {
    detail = std::string(" exception: ") + e.what();
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf(
      "[%s] criterion-9 stage-1 teacher held-out tracking error %.3f m "
      "(gate 0.15 m, budget 2e6 env steps; %.0f s wall)%s\n",
      ok ? "PASS" : "FAIL", err, secs, detail.c_str());
  return ok ? 0 : 1;
}
