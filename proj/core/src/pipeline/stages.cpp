#include "keyloco/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "keyloco/distill/dagger.hpp"
#include "keyloco/parallel.hpp"
#include "keyloco/pipeline/manifest.hpp"
#include "keyloco/rl/ppo.hpp"

namespace keyloco::pipeline {

namespace fs = std::filesystem;

using envs::TaskEnv;
using envs::TaskEnvConfig;
using envs::TrackerEnv;
using envs::TrackerEnvConfig;

namespace {

// Stream-id bases keep every stage's env RNGs on disjoint streams of the
// same root seed.
constexpr uint64_t kStage1Envs = 1000;
constexpr uint64_t kStage2Envs = 2000;
constexpr uint64_t kStage3Envs = 3000;
constexpr uint64_t kStage4Envs = 4000;
constexpr uint64_t kStage2Shuffle = 0x2da6;
constexpr uint64_t kStage4Shuffle = 0x4da6;
constexpr uint64_t kHeldOutSeed = 0x5eed;

TrackerEnvConfig tracker_env_config(const PipelineConfig& cfg,
                                    TrackerEnvConfig::Mode mode) {
  TrackerEnvConfig ec;
  ec.mode = mode;
  ec.inject_noise = cfg.inject_noise;
  ec.stats_on_raw = cfg.stats_on_raw;
  ec.min_duration = cfg.motion_min_duration;
  ec.max_duration = cfg.motion_max_duration;
  ec.max_speed = cfg.motion_max_speed;
  ec.max_heading = cfg.motion_max_heading;
  ec.sim = cfg.sim;
  return ec;
}

void add_meta(nn::Checkpoint& ck, const std::string& name, double value) {
  ck.tensors.push_back({name, {1}, {static_cast<float>(value)}});
}

double meta_value(const nn::Checkpoint& ck, const std::string& name) {
  return ck.find(name).data.at(0);
}

void save_actor_critic(nn::Checkpoint& ck, nn::GaussianPolicy<float>& policy,
                       nn::Mlp<float>& value) {
  auto pv = policy.params(nullptr, nullptr);
  ck.add_params(pv);
  auto vv = value.params(nullptr, "value");
  ck.add_params(vv);
}

void restore_actor_critic(const nn::Checkpoint& ck, nn::GaussianPolicy<float>& policy,
                          nn::Mlp<float>& value) {
  auto pv = policy.params(nullptr, nullptr);
  ck.restore_params(pv);
  auto vv = value.params(nullptr, "value");
  ck.restore_params(vv);
}

// Held-out stand+walk motions for the stage-1 gate: alternating stand and
// walk at speeds 0.3/0.6/0.9/1.2 with small fixed headings.
std::vector<motion::ReferenceMotion> heldout_motions(const PipelineConfig& cfg,
                                                     int count) {
  std::vector<motion::ReferenceMotion> out;
  for (int i = 0; i < count; ++i) {
    motion::MotionParams p;
    p.start_pos = Vec3{0, 0, cfg.sim.rest_height};
    if (i % 2 == 0) {
      out.push_back(motion::generate_motion(motion::MotionKind::kStand, p, 4.0, cfg.sim));
    } else {
      p.speed = 0.3 + 0.3 * ((i / 2) % 4);
      p.heading = ((i / 2) % 3 - 1) * 0.2;
      out.push_back(motion::generate_motion(motion::MotionKind::kWalk, p, 5.0, cfg.sim));
    }
  }
  return out;
}

// Mean per-effector tracking error of the deterministic policy over the
// held-out motions (averaged over control steps and motions).
double eval_tracker_error(const nn::GaussianPolicy<float>& policy,
                          const PipelineConfig& cfg,
                          const std::vector<motion::ReferenceMotion>& motions) {
  std::vector<double> per_motion(motions.size(), 0.0);
  parallel_for(static_cast<int>(motions.size()), [&](int i) {
    TrackerEnvConfig ec = tracker_env_config(cfg, TrackerEnvConfig::Mode::kTeacher);
    TrackerEnv env(ec, Rng::derive(kHeldOutSeed, i), {motions[i]});
    nn::Mlp<float>::Cache cache;
    double err_sum = 0.0;
    int steps = 0;
    while (true) {
      const auto& mu = policy.mean.forward(env.obs().data(), cache);
      std::vector<float> a(mu.begin(), mu.end());
      env.clip_action(a);
      auto r = env.step(a);
      err_sum += env.mean_effector_error();
      ++steps;
      if (r.done) break;
    }
    per_motion[i] = steps > 0 ? err_sum / steps : 1e9;
  });
  double total = 0.0;
  for (double e : per_motion) total += e;
  return motions.empty() ? 1e9 : total / motions.size();
}

void write_manifest(const std::string& path, const std::string& stage,
                    const PipelineConfig& cfg,
                    const std::vector<RunManifest::Artifact>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::string& started) {
  RunManifest m;
  m.stage = stage;
  m.config_hash = cfg.hash();
  m.build_id = build_id();
  m.inputs = inputs;
  for (const auto& o : outputs) m.outputs.push_back({o, nn::file_hash(o)});
  m.seeds = {cfg.seed};
  m.started_at = started;
  m.finished_at = utc_now();
  m.save(path);
}

std::ofstream open_log(const std::string& path, bool append, const std::string& header) {
  bool write_header = !append || !fs::exists(path);
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open log " + path);
  if (write_header) os << header << "\n";
  os << std::setprecision(10);
  return os;
}

}  // namespace

nn::Checkpoint load_artifact(const std::string& path) {
  if (!fs::exists(path)) throw ArtifactError("missing input artifact: " + path);
  try {
    return nn::Checkpoint::load(path);
  } catch (const std::exception& e) {
    throw ArtifactError("unreadable artifact " + path + ": " + e.what());
  }
}

nn::Mlp<float> mlp_from_checkpoint(const nn::Checkpoint& ck, const std::string& prefix) {
  std::vector<int> dims;
  std::vector<const nn::Checkpoint::Entry*> ws, bs;
  for (int l = 0;; ++l) {
    std::string wn = prefix + ".w" + std::to_string(l);
    bool found = false;
    for (const auto& e : ck.tensors) {
      if (e.name == wn) {
        ws.push_back(&e);
        found = true;
        break;
      }
    }
    if (!found) break;
    for (const auto& e : ck.tensors)
      if (e.name == prefix + ".b" + std::to_string(l)) bs.push_back(&e);
  }
  if (ws.empty() || ws.size() != bs.size())
    throw ArtifactError("checkpoint lacks MLP tensors for prefix " + prefix);
  dims.push_back(ws[0]->shape.at(1));
  for (const auto* w : ws) dims.push_back(w->shape.at(0));
  nn::Mlp<float> net(dims);
  for (size_t l = 0; l < ws.size(); ++l) {
    std::copy(ws[l]->data.begin(), ws[l]->data.end(), net.weights(l).begin());
    std::copy(bs[l]->data.begin(), bs[l]->data.end(), net.biases(l).begin());
  }
  return net;
}

hms::HmsBounds bounds_from_tracker(const nn::Checkpoint& tracker_ckpt) {
  if (tracker_ckpt.stats.dims.size() != kCommandDim)
    throw ArtifactError("tracker checkpoint has no 18-dim command stats");
  return hms::HmsBounds(tracker_ckpt.stats);
}

StageResult train_motion_teacher(const PipelineConfig& cfg, bool resume) {
  fs::create_directories(cfg.out_dir);
  StageResult result;
  result.checkpoint = cfg.out_dir + "/motion_teacher.ckpt";
  result.log_csv = cfg.out_dir + "/stage1_log.csv";
  result.manifest = cfg.out_dir + "/stage1_manifest.json";
  std::string started = utc_now();

  TrackerEnvConfig ec = tracker_env_config(cfg, TrackerEnvConfig::Mode::kTeacher);
  std::vector<std::unique_ptr<rl::Env>> env_list;
  for (int i = 0; i < cfg.ppo_tracker.num_envs; ++i)
    env_list.push_back(
        std::make_unique<TrackerEnv>(ec, Rng::derive(cfg.seed, kStage1Envs + i)));
  rl::PpoTrainer trainer(std::move(env_list), cfg.ppo_tracker, cfg.seed);

  bool resumed = false;
  if (resume && fs::exists(result.checkpoint)) {
    nn::Checkpoint ck = load_artifact(result.checkpoint);
    if (ck.kind != "motion_teacher")
      throw ArtifactError("resume checkpoint has kind " + ck.kind);
    restore_actor_critic(ck, trainer.policy(), trainer.value_net());
    trainer.set_env_steps(static_cast<int64_t>(meta_value(ck, "meta.env_steps")));
    resumed = true;
  }

  auto motions = heldout_motions(cfg, cfg.stage1_eval_motions);
  auto log = open_log(result.log_csv, resumed,
                      "iteration,env_steps,mean_return,mean_episode_length,"
                      "policy_loss,value_loss,entropy,clip_fraction,eval_error");

  double eval_error = eval_tracker_error(trainer.policy(), cfg, motions);
  result.gate_passed = eval_error <= cfg.stage1_gate_error;
  int iteration = 0;
  while (!result.gate_passed && trainer.env_steps() < cfg.ppo_tracker.total_env_steps) {
    rl::PpoStats stats = trainer.iterate();
    ++iteration;
    if (iteration % cfg.stage1_eval_interval == 0 ||
        trainer.env_steps() >= cfg.ppo_tracker.total_env_steps) {
      eval_error = eval_tracker_error(trainer.policy(), cfg, motions);
      result.gate_passed = eval_error <= cfg.stage1_gate_error;
    }
    log << iteration << "," << trainer.env_steps() << "," << stats.mean_return << ","
        << stats.mean_episode_length << "," << stats.policy_loss << ","
        << stats.value_loss << "," << stats.entropy << "," << stats.clip_fraction
        << "," << eval_error << "\n";
  }
  log.close();
  result.final_metric = eval_error;

  nn::Checkpoint ck;
  ck.kind = "motion_teacher";
  save_actor_critic(ck, trainer.policy(), trainer.value_net());
  add_meta(ck, "meta.env_steps", static_cast<double>(trainer.env_steps()));
  ck.save(result.checkpoint);
  write_manifest(result.manifest, "train_motion_teacher", cfg, {},
                 {result.checkpoint, result.log_csv}, started);
  return result;
}

StageResult distill_keypoint_tracker(const PipelineConfig& cfg,
                                     const std::string& teacher_ckpt) {
  fs::create_directories(cfg.out_dir);
  StageResult result;
  result.checkpoint = cfg.out_dir + "/keypoint_tracker.ckpt";
  result.log_csv = cfg.out_dir + "/stage2_log.csv";
  result.manifest = cfg.out_dir + "/stage2_manifest.json";
  std::string started = utc_now();

  nn::Checkpoint teacher = load_artifact(teacher_ckpt);
  if (teacher.kind != "motion_teacher")
    throw ArtifactError("stage 2 expects a motion_teacher checkpoint, got " + teacher.kind);
  nn::Mlp<float> teacher_mean = mlp_from_checkpoint(teacher, "policy.mean");
  if (teacher_mean.in_dim() != TrackerEnv::kTeacherObsDim)
    throw ArtifactError("teacher observation dim mismatch");

  TrackerEnvConfig ec = tracker_env_config(cfg, TrackerEnvConfig::Mode::kStudent);
  ec.collect_stats = true;
  std::vector<std::unique_ptr<envs::DistillEnv>> env_list;
  for (int i = 0; i < cfg.ppo_tracker.num_envs; ++i)
    env_list.push_back(
        std::make_unique<TrackerEnv>(ec, Rng::derive(cfg.seed, kStage2Envs + i)));

  distill::MlpStudent student(
      {TrackerEnv::kStudentObsDim, cfg.ppo_tracker.hidden, cfg.ppo_tracker.hidden,
       kCommandDim},
      cfg.distill_tracker.lr, Rng::derive(cfg.seed, 0x51));

  Rng shuffle = Rng::derive(cfg.seed, kStage2Shuffle);
  distill::DistillResult dr =
      distill::distill(student, teacher_mean, env_list, cfg.distill_tracker, shuffle);

  auto log = open_log(result.log_csv, false,
                      "iteration,dataset_size,train_mse,heldout_mse");
  for (const auto& row : dr.log)
    log << row.iteration << "," << row.dataset_size << "," << row.train_mse << ","
        << row.heldout_mse << "\n";
  log.close();
  result.final_metric =
      dr.initial_heldout > 0 ? dr.final_heldout / dr.initial_heldout : 0.0;

  // Freeze the command stats observed during distillation rollouts.
  hms::NormalizerStats stats(kCommandDim);
  for (auto& e : env_list)
    stats.merge(static_cast<TrackerEnv*>(e.get())->stats());

  nn::Checkpoint ck;
  ck.kind = "keypoint_tracker";
  auto sv = student.net().params(nullptr, "student");
  ck.add_params(sv);
  ck.stats = stats;
  ck.save(result.checkpoint);
  write_manifest(result.manifest, "distill_keypoint_tracker", cfg,
                 {{teacher_ckpt, nn::file_hash(teacher_ckpt)}},
                 {result.checkpoint, result.log_csv}, started);
  return result;
}

StageResult train_task_teacher(const PipelineConfig& cfg,
                               const std::string& tracker_ckpt,
                               TaskEnvConfig::Interface interface) {
  fs::create_directories(cfg.out_dir);
  bool flat = interface == TaskEnvConfig::Interface::kFlat;
  StageResult result;
  result.checkpoint =
      cfg.out_dir + (flat ? "/task_teacher_flat.ckpt" : "/task_teacher.ckpt");
  result.log_csv = cfg.out_dir + "/stage3_log.csv";
  result.manifest = cfg.out_dir + "/stage3_manifest.json";
  std::string started = utc_now();

  nn::Checkpoint tracker = load_artifact(tracker_ckpt);
  if (tracker.kind != "keypoint_tracker")
    throw ArtifactError("stage 3 expects a keypoint_tracker checkpoint, got " +
                        tracker.kind);
  nn::Mlp<float> tracker_mean = mlp_from_checkpoint(tracker, "student");

  TaskEnvConfig tc;
  tc.task = cfg.task;
  tc.large_kick = cfg.large_kick;
  tc.interface = interface;
  tc.obs_mode = TaskEnvConfig::ObsMode::kState;
  tc.clip_commands = cfg.clip_commands && !flat;
  if (tc.clip_commands) tc.bounds = bounds_from_tracker(tracker);
  tc.episode_length = cfg.episode_length;
  tc.p_execute = cfg.p_execute;
  tc.sim = cfg.sim;

  std::vector<std::unique_ptr<rl::Env>> env_list;
  for (int i = 0; i < cfg.ppo_task.num_envs; ++i)
    env_list.push_back(std::make_unique<TaskEnv>(
        tc, tracker_mean, Rng::derive(cfg.seed, kStage3Envs + i)));
  rl::PpoTrainer trainer(std::move(env_list), cfg.ppo_task, cfg.seed + 3);

  auto log = open_log(result.log_csv, false,
                      "iteration,env_steps,mean_return,mean_episode_length,"
                      "policy_loss,value_loss,entropy,clip_fraction");
  std::deque<double> recent;
  int iteration = 0;
  while (trainer.env_steps() < cfg.ppo_task.total_env_steps) {
    rl::PpoStats stats = trainer.iterate();
    ++iteration;
    log << iteration << "," << trainer.env_steps() << "," << stats.mean_return << ","
        << stats.mean_episode_length << "," << stats.policy_loss << ","
        << stats.value_loss << "," << stats.entropy << "," << stats.clip_fraction
        << "\n";
    recent.push_back(stats.mean_return);
    if (recent.size() > 10) recent.pop_front();
  }
  log.close();
  double sum = 0.0;
  for (double r : recent) sum += r;
  result.final_metric = recent.empty() ? 0.0 : sum / recent.size();

  nn::Checkpoint ck;
  ck.kind = flat ? "task_teacher_flat" : "task_teacher";
  save_actor_critic(ck, trainer.policy(), trainer.value_net());
  add_meta(ck, "meta.env_steps", static_cast<double>(trainer.env_steps()));
  add_meta(ck, "meta.final_return", result.final_metric);
  ck.save(result.checkpoint);
  write_manifest(result.manifest, "train_task_teacher", cfg,
                 {{tracker_ckpt, nn::file_hash(tracker_ckpt)}},
                 {result.checkpoint, result.log_csv}, started);
  return result;
}

StageResult distill_vision_student(const PipelineConfig& cfg,
                                   const std::string& task_teacher_ckpt,
                                   const std::string& tracker_ckpt, bool blind) {
  fs::create_directories(cfg.out_dir);
  StageResult result;
  result.checkpoint =
      cfg.out_dir + (blind ? "/blind_student.ckpt" : "/vision_student.ckpt");
  result.log_csv = cfg.out_dir + "/stage4_log.csv";
  result.manifest = cfg.out_dir + "/stage4_manifest.json";
  std::string started = utc_now();

  nn::Checkpoint teacher = load_artifact(task_teacher_ckpt);
  if (teacher.kind != "task_teacher")
    throw ArtifactError("stage 4 expects a task_teacher checkpoint, got " +
                        teacher.kind);
  nn::Mlp<float> teacher_mean = mlp_from_checkpoint(teacher, "policy.mean");

  nn::Checkpoint tracker = load_artifact(tracker_ckpt);
  if (tracker.kind != "keypoint_tracker")
    throw ArtifactError("stage 4 expects a keypoint_tracker checkpoint, got " +
                        tracker.kind);
  nn::Mlp<float> tracker_mean = mlp_from_checkpoint(tracker, "student");

  TaskEnvConfig tc;
  tc.task = cfg.task;
  tc.large_kick = cfg.large_kick;
  tc.interface = TaskEnvConfig::Interface::kKeypoint;
  tc.obs_mode = blind ? TaskEnvConfig::ObsMode::kBlind : TaskEnvConfig::ObsMode::kVision;
  tc.clip_commands = cfg.clip_commands;
  if (tc.clip_commands) tc.bounds = bounds_from_tracker(tracker);
  tc.episode_length = cfg.episode_length;
  tc.p_execute = cfg.p_execute;
  tc.perturb_camera = cfg.perturb_camera;
  tc.augment_masks = cfg.augment_masks;
  tc.masks = cfg.masks;
  tc.sim = cfg.sim;

  std::vector<std::unique_ptr<envs::DistillEnv>> env_list;
  for (int i = 0; i < cfg.ppo_task.num_envs; ++i)
    env_list.push_back(std::make_unique<TaskEnv>(
        tc, tracker_mean, Rng::derive(cfg.seed, kStage4Envs + i)));

  const int state_dim = envs::kProprioDim + 1;
  std::unique_ptr<distill::Student> student;
  if (blind) {
    student = std::make_unique<distill::MlpStudent>(
        std::vector<int>{state_dim, cfg.ppo_task.hidden, cfg.ppo_task.hidden,
                         kCommandDim},
        cfg.distill_vision.lr, Rng::derive(cfg.seed, 0x52));
  } else {
    student = std::make_unique<distill::VisionStudent>(
        state_dim, kCommandDim, cfg.ppo_task.hidden, cfg.distill_vision.lr,
        Rng::derive(cfg.seed, 0x53));
  }

  Rng shuffle = Rng::derive(cfg.seed, kStage4Shuffle);
  distill::DistillResult dr =
      distill::distill(*student, teacher_mean, env_list, cfg.distill_vision, shuffle);

  auto log = open_log(result.log_csv, false,
                      "iteration,dataset_size,train_mse,heldout_mse");
  for (const auto& row : dr.log)
    log << row.iteration << "," << row.dataset_size << "," << row.train_mse << ","
        << row.heldout_mse << "\n";
  log.close();
  result.final_metric =
      dr.initial_heldout > 0 ? dr.final_heldout / dr.initial_heldout : 0.0;

  // Blind runs must never touch the renderer; vision runs must augment every
  // rendered frame when augmentation is on.
  int64_t renders = 0, augments = 0;
  for (auto& e : env_list) {
    renders += static_cast<TaskEnv*>(e.get())->render_calls();
    augments += static_cast<TaskEnv*>(e.get())->augment_calls();
  }
  if (blind && renders != 0)
    throw std::logic_error("blind distillation invoked the renderer");
  if (!blind && cfg.augment_masks && renders != augments)
    throw std::logic_error("augmentation did not cover all rendered frames");

  nn::Checkpoint ck;
  ck.kind = blind ? "blind_student" : "vision_student";
  if (blind) {
    auto sv = static_cast<distill::MlpStudent*>(student.get())
                  ->net()
                  .params(nullptr, "student");
    ck.add_params(sv);
  } else {
    auto* vs = static_cast<distill::VisionStudent*>(student.get());
    auto ev = vs->encoder().params(nullptr);
    ck.add_params(ev);
    auto hv = vs->head().params(nullptr, "head");
    ck.add_params(hv);
  }
  ck.stats = tracker.stats;  // carried for deployment-time clipping
  ck.save(result.checkpoint);
  write_manifest(result.manifest, "distill_vision_student", cfg,
                 {{task_teacher_ckpt, nn::file_hash(task_teacher_ckpt)},
                  {tracker_ckpt, nn::file_hash(tracker_ckpt)}},
                 {result.checkpoint, result.log_csv}, started);
  return result;
}

}  // namespace keyloco::pipeline
