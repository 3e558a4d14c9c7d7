#include "keyloco/envs/task_env.hpp"

#include <cmath>
#include <stdexcept>

#include "keyloco/depth/render.hpp"
#include "keyloco/sim/world.hpp"
#include "keyloco/tasks/scenes.hpp"

namespace keyloco::envs {

TaskEnv::TaskEnv(const TaskEnvConfig& cfg, nn::Mlp<float> tracker, Rng rng)
    : cfg_(cfg), tracker_(std::move(tracker)), rng_(std::move(rng)) {
  if (cfg_.interface == TaskEnvConfig::Interface::kKeypoint) {
    if (tracker_.in_dim() != TrackerEnv::kStudentObsDim ||
        tracker_.out_dim() != kCommandDim)
      throw std::invalid_argument("TaskEnv: tracker must map 71 -> 18");
  }
  if (cfg_.clip_commands &&
      cfg_.interface == TaskEnvConfig::Interface::kKeypoint &&
      cfg_.bounds.lower.size() != kCommandDim)
    throw std::invalid_argument("TaskEnv: clip_commands requires 18-dim HMS bounds");
  scene_ = tasks::make_scene(cfg_.task);
  reward_cfg_ = reward::default_reward_config(cfg_.task, cfg_.large_kick);
  obs_.resize(obs_dim());
  teacher_obs_.resize(kStateObsDim);
  reset();
}

int TaskEnv::obs_dim() const {
  switch (cfg_.obs_mode) {
    case TaskEnvConfig::ObsMode::kState:
      return kStateObsDim;
    case TaskEnvConfig::ObsMode::kVision:
      return kProprioDim + 1 + depth::DepthImage::kPixels;
    case TaskEnvConfig::ObsMode::kBlind:
      return kProprioDim + 1;
  }
  return 0;
}

void TaskEnv::reset() {
  state_ = sim::reset(scene_, rng_, cfg_.sim, objects_);
  contacts_ = sim::ContactReport{};
  extrema_.reset(objects_[0].pos.x, objects_[0].pos.y);
  binary_cmd_ = rng_.bernoulli(cfg_.p_execute) ? 1 : 0;
  camera_ = cfg_.perturb_camera ? depth::perturb_camera(cfg_.camera, rng_)
                                : cfg_.camera;
  pause_ref_.root_pos = state_.root_pos;
  pause_ref_.root_yaw = state_.root_yaw;
  pause_ref_.effector_pos = state_.effector_pos;
  prev_hl_action_.fill(0.0);
  prev_low_action_.fill(0.0);
  last_reward_ = reward::TaskRewardBreakdown{};
  t_ = 0.0;
  build_obs();
}

void TaskEnv::build_state_obs(rl::ObsVec& out) {
  float* o = out.data();
  fill_proprio(state_, prev_hl_action_, o);
  int k = kProprioDim;
  const auto& obj = objects_[0];
  Vec3 rel = obj.pos - state_.root_pos;
  o[k++] = static_cast<float>(rel.x);
  o[k++] = static_cast<float>(rel.y);
  o[k++] = static_cast<float>(rel.z);
  o[k++] = static_cast<float>(std::sin(obj.yaw));
  o[k++] = static_cast<float>(std::cos(obj.yaw));
  o[k++] = static_cast<float>(obj.vel.x);
  o[k++] = static_cast<float>(obj.vel.y);
  o[k++] = static_cast<float>(obj.vel.z);
  o[k++] = static_cast<float>(obj.yaw_rate);
  Vec3 size = obj.shape == sim::ShapeKind::kBox
                  ? obj.half_extents
                  : Vec3{obj.radius, obj.radius, obj.radius};
  o[k++] = static_cast<float>(size.x);
  o[k++] = static_cast<float>(size.y);
  o[k++] = static_cast<float>(size.z);
  o[k++] = static_cast<float>(obj.friction);
  o[k++] = static_cast<float>(obj.contact_force / 50.0);
  o[k++] = static_cast<float>(binary_cmd_);
}

void TaskEnv::build_obs() {
  if (cfg_.obs_mode == TaskEnvConfig::ObsMode::kState) {
    build_state_obs(obs_);
    return;
  }
  float* o = obs_.data();
  fill_proprio(state_, prev_hl_action_, o);
  int k = kProprioDim;
  o[k++] = static_cast<float>(binary_cmd_);
  if (cfg_.obs_mode == TaskEnvConfig::ObsMode::kVision) {
    depth::DepthImage img = depth::render_depth(state_, objects_, camera_);
    ++render_calls_;
    if (cfg_.augment_masks) {
      img = depth::augment_depth(img, cfg_.masks, rng_);
      ++augment_calls_;
    }
    for (float v : img.px) o[k++] = v;
  }
}

const rl::ObsVec& TaskEnv::teacher_obs() {
  build_state_obs(teacher_obs_);
  return teacher_obs_;
}

void TaskEnv::clip_action(std::vector<float>& action) const {
  if (cfg_.interface == TaskEnvConfig::Interface::kFlat) {
    for (auto& a : action)
      a = static_cast<float>(clamp(static_cast<double>(a), -1.0, 1.0));
    return;
  }
  if (!cfg_.clip_commands) return;
  std::array<double, kCommandDim> tmp{};
  for (int j = 0; j < kCommandDim; ++j) tmp[j] = action[j];
  hms::clip_to_hms(tmp.data(), cfg_.bounds);
  for (int j = 0; j < kCommandDim; ++j) action[j] = static_cast<float>(tmp[j]);
}

rl::StepResult TaskEnv::step(const std::vector<float>& action) {
  std::array<double, kCommandDim> hl{};
  for (int j = 0; j < kCommandDim; ++j) hl[j] = action[j];

  std::vector<tasks::TrajectoryRow> pending;
  for (int s = 0; s < cfg_.low_steps_per_tick && !state_.fallen; ++s) {
    std::array<double, kCommandDim> low{};
    if (cfg_.interface == TaskEnvConfig::Interface::kFlat) {
      for (int j = 0; j < kCommandDim; ++j) low[j] = clamp(hl[j], -1.0, 1.0);
    } else {
      // Frozen tracker: student obs = proprio + the held command.
      rl::ObsVec tin(TrackerEnv::kStudentObsDim);
      fill_proprio(state_, prev_low_action_, tin.data());
      for (int j = 0; j < kCommandDim; ++j)
        tin[kProprioDim + j] = static_cast<float>(hl[j]);
      const auto& out = tracker_.forward(tin.data(), tracker_cache_);
      for (int j = 0; j < kCommandDim; ++j)
        low[j] = clamp(static_cast<double>(out[j]), -1.0, 1.0);
    }
    sim::LowLevelAction act = sim::pd_action(state_, cfg_.sim, low.data());
    contacts_ = sim::step(state_, objects_, act, cfg_.sim);
    prev_low_action_ = low;
    t_ += cfg_.sim.control_dt();

    if (log_) {
      tasks::TrajectoryRow row;
      row.time = t_;
      row.state = state_;
      row.objects = objects_;
      row.action = low;
      row.binary_cmd = binary_cmd_;
      pending.push_back(std::move(row));
    }
  }
  prev_hl_action_ = hl;

  last_reward_ = reward::task_reward(cfg_.task, reward_cfg_, state_, objects_,
                                     scene_, extrema_, binary_cmd_, pause_ref_);
  if (log_) {
    for (auto& row : pending) {
      row.reward = last_reward_;
      log_->rows.push_back(std::move(row));
    }
  }

  rl::StepResult r;
  r.reward = static_cast<float>(last_reward_.total);
  r.done = state_.fallen || t_ >= cfg_.episode_length - 1e-9;
  if (!r.done) build_obs();
  return r;
}

}  // namespace keyloco::envs
