#include <filesystem>
#include <fstream>
#include <functional>

#include "keyloco/nn/conv.hpp"
#include "keyloco/parallel.hpp"
#include "keyloco/pipeline/stages.hpp"
#include "keyloco/tasks/metrics.hpp"

namespace keyloco::pipeline {

namespace fs = std::filesystem;
using envs::TaskEnv;
using envs::TaskEnvConfig;

namespace {

constexpr uint64_t kEvalEnvStream = 9000;

// Deterministic policy closure over the checkpoint contents. Must be safe to
// call concurrently (builds local caches per call).
using ActFn = std::function<void(const float*, float*)>;

struct LoadedPolicy {
  ActFn act;
  TaskEnvConfig::ObsMode obs_mode = TaskEnvConfig::ObsMode::kState;
  TaskEnvConfig::Interface interface = TaskEnvConfig::Interface::kKeypoint;
};

LoadedPolicy load_policy(const nn::Checkpoint& ck) {
  LoadedPolicy out;
  if (ck.kind == "task_teacher" || ck.kind == "task_teacher_flat") {
    auto net = std::make_shared<nn::Mlp<float>>(mlp_from_checkpoint(ck, "policy.mean"));
    out.obs_mode = TaskEnvConfig::ObsMode::kState;
    out.interface = ck.kind == "task_teacher_flat" ? TaskEnvConfig::Interface::kFlat
                                                   : TaskEnvConfig::Interface::kKeypoint;
    out.act = [net](const float* obs, float* a) {
      nn::Mlp<float>::Cache cache;
      const auto& y = net->forward(obs, cache);
      std::copy(y.begin(), y.end(), a);
    };
  } else if (ck.kind == "blind_student") {
    auto net = std::make_shared<nn::Mlp<float>>(mlp_from_checkpoint(ck, "student"));
    out.obs_mode = TaskEnvConfig::ObsMode::kBlind;
    out.act = [net](const float* obs, float* a) {
      nn::Mlp<float>::Cache cache;
      const auto& y = net->forward(obs, cache);
      std::copy(y.begin(), y.end(), a);
    };
  } else if (ck.kind == "vision_student") {
    auto enc = std::make_shared<nn::DepthEncoder<float>>();
    auto views = enc->params(nullptr);
    ck.restore_params(views);
    auto head = std::make_shared<nn::Mlp<float>>(mlp_from_checkpoint(ck, "head"));
    int state_dim = head->in_dim() - nn::DepthEncoder<float>::kFeatures;
    out.obs_mode = TaskEnvConfig::ObsMode::kVision;
    out.act = [enc, head, state_dim](const float* obs, float* a) {
      nn::DepthEncoder<float>::Cache ec;
      nn::Mlp<float>::Cache hc;
      const auto& feat = enc->forward(obs + state_dim, ec);
      std::vector<float> hin(head->in_dim());
      std::copy(obs, obs + state_dim, hin.begin());
      std::copy(feat.begin(), feat.end(), hin.begin() + state_dim);
      const auto& y = head->forward(hin.data(), hc);
      std::copy(y.begin(), y.end(), a);
    };
  } else {
    throw ArtifactError("cannot evaluate checkpoint of kind " + ck.kind);
  }
  return out;
}

}  // namespace

EvalResult evaluate_checkpoint(const PipelineConfig& cfg, const std::string& ckpt,
                               const std::string& tracker_ckpt) {
  fs::create_directories(cfg.out_dir);
  nn::Checkpoint ck = load_artifact(ckpt);
  LoadedPolicy policy = load_policy(ck);

  nn::Checkpoint tracker = load_artifact(tracker_ckpt);
  if (tracker.kind != "keypoint_tracker")
    throw ArtifactError("eval expects a keypoint_tracker checkpoint, got " +
                        tracker.kind);
  nn::Mlp<float> tracker_mean = mlp_from_checkpoint(tracker, "student");

  TaskEnvConfig tc;
  tc.task = cfg.task;
  tc.large_kick = cfg.large_kick;
  tc.interface = policy.interface;
  tc.obs_mode = policy.obs_mode;
  tc.clip_commands =
      cfg.clip_commands && policy.interface == TaskEnvConfig::Interface::kKeypoint;
  if (tc.clip_commands) tc.bounds = bounds_from_tracker(tracker);
  tc.episode_length = cfg.episode_length;
  tc.p_execute = cfg.p_execute;
  tc.perturb_camera = cfg.perturb_camera;
  tc.augment_masks = cfg.augment_masks;
  tc.masks = cfg.masks;
  tc.sim = cfg.sim;

  const int n = cfg.eval_seeds * cfg.eval_rollouts;
  std::vector<tasks::EpisodeMetrics> episodes(n);
  parallel_for(n, [&](int idx) {
    int seed_idx = idx / cfg.eval_rollouts;
    int rollout = idx % cfg.eval_rollouts;
    Rng env_rng = Rng::derive(cfg.seed + seed_idx, kEvalEnvStream + rollout);
    TaskEnv env(tc, tracker_mean, std::move(env_rng));
    tasks::TrajectoryLog log;
    log.task = task_name(cfg.task);
    log.dt = tc.sim.control_dt();
    env.set_trajectory_log(&log);

    std::vector<float> a(env.act_dim());
    while (true) {
      policy.act(env.obs().data(), a.data());
      env.clip_action(a);
      if (env.step(a).done) break;
    }
    episodes[idx] = tasks::compute_metrics(log, cfg.task);
  });

  EvalResult result;
  result.summary = tasks::summarize(episodes);
  result.csv_text = tasks::metrics_csv_header() + "\n" +
                    tasks::metrics_csv_row(task_name(cfg.task), ck.kind,
                                           result.summary) +
                    "\n";
  result.csv_path = cfg.out_dir + "/eval_" + task_name(cfg.task) + "_" + ck.kind + ".csv";
  std::ofstream os(result.csv_path);
  if (!os) throw std::runtime_error("cannot write " + result.csv_path);
  os << result.csv_text;
  return result;
}

}  // namespace keyloco::pipeline
