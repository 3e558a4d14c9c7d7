#include "keyloco/reward/task_reward.hpp"

#include <cmath>
#include <stdexcept>

namespace keyloco::reward {

using sim::SceneObject;
using sim::ShapeKind;

namespace {

Vec3 target_world(const sim::SceneSpec& scene,
                  const std::vector<SceneObject>& objects, size_t idx) {
  const auto& tp = scene.target_points.at(idx);
  const auto& obj = objects.at(tp.object_index);
  return obj.pos + yaw_rotate(obj.yaw, tp.local);
}

double pause_term(const sim::PuppetState& state, const motion::RefFrame& ref) {
  MotionRewardConfig mc;
  double track = mc.w_root_pos * std::exp(-mc.k_root_pos * (state.root_pos - ref.root_pos).norm2());
  track += mc.w_root_vel * std::exp(-mc.k_root_vel * state.root_lin_vel.norm2());
  for (int i = 0; i < kNumEffectors; ++i) {
    track += mc.w_effector *
             std::exp(-mc.k_effector * (state.effector_pos[i] - ref.effector_pos[i]).norm2());
  }
  return track / mc.max_track();
}

}  // namespace

RewardConfig default_reward_config(TaskId task, bool large_kick) {
  RewardConfig rc;
  switch (task) {
    case TaskId::kPushBox:
      rc.f_des = 30.0;
      rc.w_approach = 1.0;
      rc.w_forward = 2.0;
      rc.w_force = 0.5;
      rc.w_look = 0.1;
      rc.w_drift = 1.0;
      break;
    case TaskId::kKickBox:
      rc.w_approach = 1.0;
      rc.w_forward = 2.0;
      rc.w_look = 0.1;
      rc.w_drift = 1.0;
      rc.w_force = large_kick ? 0.5 : 0.0;
      rc.f_des = large_kick ? 50.0 : 0.0;
      break;
    case TaskId::kKickBall:
      rc.w_approach = 1.0;
      rc.w_forward = 2.0;
      rc.w_look = 0.1;
      rc.w_drift = 1.0;
      rc.w_force = 0.0;
      break;
    case TaskId::kLiftBox:
      rc.w_approach = 1.0;
      rc.w_height = 2.0;
      rc.w_look = 0.1;
      rc.w_forward = 0.0;
      rc.w_drift = 0.0;
      rc.w_force = 0.0;
      break;
    case TaskId::kReachBox:
      rc.w_approach = 1.0;
      rc.w_vel = 1.0;
      rc.w_look = 0.1;
      rc.w_forward = 0.0;
      rc.w_drift = 0.0;
      rc.w_force = 0.0;
      break;
  }
  return rc;
}

TaskRewardBreakdown task_reward(TaskId task, const RewardConfig& rc,
                                const sim::PuppetState& state,
                                const std::vector<SceneObject>& objects,
                                const sim::SceneSpec& scene,
                                RunningExtrema& extrema, int binary_cmd,
                                const motion::RefFrame& pause_ref) {
  if (objects.empty()) throw std::invalid_argument("task_reward: no objects");
  TaskRewardBreakdown out;
  const SceneObject& obj = objects[0];

  if (binary_cmd == 0) {
    out.pause = pause_term(state, pause_ref);
    out.total = out.pause;
    return out;
  }

  Vec3 facing = yaw_rotate(state.root_yaw, Vec3{1, 0, 0});
  Vec3 to_obj = obj.pos - state.root_pos;
  to_obj.z = 0;

  switch (task) {
    case TaskId::kPushBox: {
      double d1 = (state.effector_pos[kLeftHand] - target_world(scene, objects, 0)).norm();
      double d2 = (state.effector_pos[kRightHand] - target_world(scene, objects, 1)).norm();
      out.approach = rc.w_approach * r_approach_pair(d1, d2, rc);
      out.forward = rc.w_forward * r_forward(obj.pos.x, extrema, rc);
      out.force = rc.w_force * r_force(obj.contact_force, rc.f_des, rc);
      out.drift = rc.w_drift * r_drift(obj.pos.y, extrema, rc);
      out.look = rc.w_look * r_look(facing, to_obj);
      break;
    }
    case TaskId::kKickBox: {
      Vec3 target = target_world(scene, objects, 0);
      double d = std::min((state.effector_pos[kLeftFoot] - target).norm(),
                          (state.effector_pos[kRightFoot] - target).norm());
      out.approach = rc.w_approach * r_approach_single(d, rc);
      out.forward = rc.w_forward * r_forward(obj.pos.x, extrema, rc);
      out.drift = rc.w_drift * r_drift(obj.pos.y, extrema, rc);
      out.look = rc.w_look * r_look(facing, to_obj);
      if (rc.w_force > 0)
        out.force = rc.w_force * r_force(obj.contact_force, rc.f_des, rc);
      break;
    }
    case TaskId::kKickBall: {
      double d = std::min((state.effector_pos[kLeftFoot] - obj.pos).norm(),
                          (state.effector_pos[kRightFoot] - obj.pos).norm());
      d = std::max(0.0, d - obj.radius);
      out.approach = rc.w_approach * r_approach_single(d, rc);
      out.forward = rc.w_forward * r_forward(obj.pos.x, extrema, rc);
      out.drift = rc.w_drift * r_drift(obj.pos.y, extrema, rc);
      out.look = rc.w_look * r_look(facing, to_obj);
      break;
    }
    case TaskId::kLiftBox: {
      double d1 = (state.effector_pos[kLeftHand] - target_world(scene, objects, 0)).norm();
      double d2 = (state.effector_pos[kRightHand] - target_world(scene, objects, 1)).norm();
      out.approach = rc.w_approach * r_approach_pair(d1, d2, rc);
      out.height = rc.w_height * std::exp(-2.0 * std::abs(obj.bottom_z() - 1.0));
      out.look = rc.w_look * r_look(facing, to_obj);
      break;
    }
    case TaskId::kReachBox: {
      // Standoff point half a meter from the near face, on the ground plane.
      Vec3 dir = (state.root_pos - obj.pos);
      dir.z = 0;
      dir = dir.normalized();
      Vec3 standoff = obj.pos + dir * (obj.bounding_radius() + 0.5);
      Vec3 diff = state.root_pos - standoff;
      diff.z = 0;
      out.approach = rc.w_approach * r_approach_single(diff.norm(), rc);
      double v_toward = state.root_lin_vel.dot(to_obj.normalized());
      out.velocity = rc.w_vel * clamp(v_toward, 0.0, 1.5) / 1.5;
      out.look = rc.w_look * r_look(facing, to_obj);
      break;
    }
  }
  out.total = out.approach + out.forward + out.force + out.look + out.drift +
              out.height + out.velocity;
  return out;
}

}  // namespace keyloco::reward
