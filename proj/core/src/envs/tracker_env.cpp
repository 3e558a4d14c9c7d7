#include "keyloco/envs/tracker_env.hpp"

#include <cmath>

#include "keyloco/sim/world.hpp"

namespace keyloco::envs {

using motion::MotionKind;
using motion::MotionParams;
using motion::ReferenceMotion;

TrackerEnv::TrackerEnv(const TrackerEnvConfig& cfg, Rng rng,
                       std::vector<ReferenceMotion> fixed_motions)
    : cfg_(cfg), rng_(std::move(rng)), fixed_motions_(std::move(fixed_motions)) {
  obs_.resize(obs_dim());
  teacher_obs_.resize(kTeacherObsDim);
  reset();
}

int TrackerEnv::obs_dim() const {
  return cfg_.mode == TrackerEnvConfig::Mode::kTeacher ? kTeacherObsDim
                                                       : kStudentObsDim;
}

void TrackerEnv::sample_motion() {
  if (!fixed_motions_.empty()) {
    motion_ = fixed_motions_[episode_ % fixed_motions_.size()];
    return;
  }
  double duration = rng_.uniform(cfg_.min_duration, cfg_.max_duration);
  MotionParams p;
  p.start_pos = Vec3{0, 0, cfg_.sim.rest_height};
  static constexpr MotionKind kKinds[] = {MotionKind::kStand, MotionKind::kWalk,
                                          MotionKind::kReach, MotionKind::kKick,
                                          MotionKind::kLift,  MotionKind::kSquatPush};
  MotionKind kind = kKinds[rng_.index(6)];
  switch (kind) {
    case MotionKind::kWalk:
    case MotionKind::kSquatPush:
      p.speed = rng_.uniform(0.2, cfg_.max_speed);
      p.heading = rng_.uniform(-cfg_.max_heading, cfg_.max_heading);
      break;
    case MotionKind::kReach:
      p.target_height = rng_.uniform(0.8, 1.4);
      break;
    case MotionKind::kLift:
      p.target_height = rng_.uniform(0.5, 1.1);
      break;
    case MotionKind::kKick:
      p.kick_foot = rng_.bernoulli(0.5) ? kRightFoot : kLeftFoot;
      p.kick_length = rng_.uniform(0.25, 0.45);
      duration = std::max(duration, 2.0);
      break;
    case MotionKind::kStand:
      break;
  }
  motion_ = motion::generate_motion(kind, p, duration, cfg_.sim);
}

void TrackerEnv::reset() {
  sample_motion();
  const auto& f0 = motion_.frames.front();
  state_ = sim::standing_state(cfg_.sim, f0.root_pos, f0.root_yaw);
  state_.effector_pos = f0.effector_pos;
  for (auto& v : state_.effector_vel) v = Vec3{};
  objects_.clear();
  contacts_ = sim::ContactReport{};
  prev_action_.fill(0.0);
  t_ = 0.0;
  error_steps_ = 0;
  episode_done_ = false;
  ++episode_;
  build_obs();
}

double TrackerEnv::mean_effector_error() const {
  const auto& ref = motion_.at(t_);
  double e = 0.0;
  for (int i = 0; i < kNumEffectors; ++i)
    e += (state_.effector_pos[i] - ref.effector_pos[i]).norm();
  return e / kNumEffectors;
}

void fill_proprio(const sim::PuppetState& state,
                  const std::array<double, kCommandDim>& prev_action, float* out) {
  int k = 0;
  out[k++] = static_cast<float>(state.root_pos.z);
  out[k++] = static_cast<float>(state.root_lin_vel.x);
  out[k++] = static_cast<float>(state.root_lin_vel.y);
  out[k++] = static_cast<float>(state.root_lin_vel.z);
  out[k++] = static_cast<float>(state.root_yaw_rate);
  for (int i = 0; i < kNumEffectors; ++i) {
    Vec3 rel = state.effector_pos[i] - state.root_pos;
    out[k++] = static_cast<float>(rel.x);
    out[k++] = static_cast<float>(rel.y);
    out[k++] = static_cast<float>(rel.z);
  }
  for (int i = 0; i < kNumEffectors; ++i) {
    Vec3 rv = state.effector_vel[i] - state.root_lin_vel;
    out[k++] = static_cast<float>(rv.x);
    out[k++] = static_cast<float>(rv.y);
    out[k++] = static_cast<float>(rv.z);
  }
  for (double a : prev_action) out[k++] = static_cast<float>(a);
}

void TrackerEnv::build_obs() {
  float* o = obs_.data();
  fill_proprio(state_, prev_action_, o);
  int k = kProprioDim;

  if (cfg_.mode == TrackerEnvConfig::Mode::kTeacher) {
    for (int i = 0; i < kNumEffectors; ++i)
      o[k++] = static_cast<float>(contacts_.effector_normal_force[i] / 100.0);
    o[k++] = contacts_.foot_ground_contact[0] ? 1.0f : 0.0f;
    o[k++] = contacts_.foot_ground_contact[1] ? 1.0f : 0.0f;
    auto goal = motion::future_window(motion_, t_, state_);
    goal.flatten(o + k);
    k += motion::TeacherGoal::kDim;
  } else {
    const auto& ref = motion_.at(t_ + cfg_.command_lookahead);
    motion::KeypointCommand cmd = motion::keypoint_command(ref, state_);
    if (cfg_.collect_stats && cfg_.stats_on_raw) hms::update_stats(stats_, cmd);
    if (cfg_.inject_noise) cmd = hms::inject_noise(cmd, rng_);
    if (cfg_.collect_stats && !cfg_.stats_on_raw) hms::update_stats(stats_, cmd);
    command_ = cmd;
    auto flat = cmd.flatten();
    for (double v : flat) o[k++] = static_cast<float>(v);
  }
}

const rl::ObsVec& TrackerEnv::teacher_obs() {
  float* o = teacher_obs_.data();
  // Proprio block is identical to the student's.
  for (int i = 0; i < kProprioDim; ++i) o[i] = obs_[i];
  int k = kProprioDim;
  for (int i = 0; i < kNumEffectors; ++i)
    o[k++] = static_cast<float>(contacts_.effector_normal_force[i] / 100.0);
  o[k++] = contacts_.foot_ground_contact[0] ? 1.0f : 0.0f;
  o[k++] = contacts_.foot_ground_contact[1] ? 1.0f : 0.0f;
  auto goal = motion::future_window(motion_, t_, state_);
  goal.flatten(o + k);
  return teacher_obs_;
}

void TrackerEnv::clip_action(std::vector<float>& action) const {
  for (auto& a : action) a = static_cast<float>(clamp(static_cast<double>(a), -1.0, 1.0));
}

rl::StepResult TrackerEnv::step(const std::vector<float>& action) {
  std::array<double, kCommandDim> a{};
  for (int j = 0; j < kCommandDim; ++j)
    a[j] = clamp(static_cast<double>(action[j]), -1.0, 1.0);
  sim::LowLevelAction act = sim::pd_action(state_, cfg_.sim, a.data());

  contacts_ = sim::step(state_, objects_, act, cfg_.sim);
  t_ += cfg_.sim.control_dt();

  const auto& ref = motion_.at(t_);
  const double dt = cfg_.sim.control_dt();
  Vec3 ref_vel = (motion_.at(t_ + dt).root_pos - motion_.at(t_ - dt).root_pos) * (1.0 / (2.0 * dt));
  auto breakdown = reward::r_motion(state_, ref, ref_vel, a, prev_action_, contacts_);
  prev_action_ = a;

  if (mean_effector_error() > cfg_.error_limit)
    ++error_steps_;
  else
    error_steps_ = 0;

  rl::StepResult r;
  r.reward = static_cast<float>(breakdown.total());
  bool error_out = error_steps_ * dt >= cfg_.error_window;
  r.done = state_.fallen || t_ >= motion_.duration() || error_out;
  episode_done_ = r.done;
  if (!r.done) build_obs();
  return r;
}

}  // namespace keyloco::envs
