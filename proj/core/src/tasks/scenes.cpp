#include "keyloco/tasks/scenes.hpp"

namespace keyloco::tasks {

using sim::ObjectSpec;
using sim::SceneSpec;
using sim::ShapeKind;

SceneSpec make_scene(TaskId task) {
  SceneSpec scene;
  scene.task_id = task_name(task);
  ObjectSpec obj;
  switch (task) {
    case TaskId::kPushBox: {
      // 30" x 40" x 40", 4 kg, friction 0.5-2.0.
      obj.shape = ShapeKind::kBox;
      obj.half_extents = Vec3{15, 20, 20} * kInchToMeter;
      obj.mass = 4.0;
      obj.friction_lo = 0.5;
      obj.friction_hi = 2.0;
      obj.pos_lo = {1.3, -0.5, 0};
      obj.pos_hi = {1.9, 0.5, 0};
      obj.yaw_lo = -0.2;
      obj.yaw_hi = 0.2;
      scene.objects.push_back(obj);
      // Two hand-push points on the near (-x) face.
      scene.target_points.push_back({0, {-obj.half_extents.x, 0.25, -0.1}});
      scene.target_points.push_back({0, {-obj.half_extents.x, -0.25, -0.1}});
      break;
    }
    case TaskId::kKickBox: {
      // 15" x 20" x 20", 0.5 kg.
      obj.shape = ShapeKind::kBox;
      obj.half_extents = Vec3{7.5, 10, 10} * kInchToMeter;
      obj.mass = 0.5;
      obj.friction_lo = 0.5;
      obj.friction_hi = 1.0;
      obj.pos_lo = {1.0, -0.5, 0};
      obj.pos_hi = {1.6, 0.5, 0};
      obj.yaw_lo = -0.2;
      obj.yaw_hi = 0.2;
      scene.objects.push_back(obj);
      // Kick point low on the near face.
      scene.target_points.push_back({0, {-obj.half_extents.x, 0.0, -0.1}});
      break;
    }
    case TaskId::kLiftBox: {
      obj.shape = ShapeKind::kBox;
      obj.half_extents = Vec3{7.5, 10, 10} * kInchToMeter;
      obj.mass = 0.5;
      obj.friction_lo = 0.8;
      obj.friction_hi = 1.5;
      obj.pos_lo = {0.9, -0.3, 0};
      obj.pos_hi = {1.3, 0.3, 0};
      scene.objects.push_back(obj);
      // Side grasp points.
      scene.target_points.push_back({0, {0.0, obj.half_extents.y, 0.0}});
      scene.target_points.push_back({0, {0.0, -obj.half_extents.y, 0.0}});
      break;
    }
    case TaskId::kReachBox: {
      obj.shape = ShapeKind::kBox;
      obj.half_extents = Vec3{15, 20, 20} * kInchToMeter;
      obj.mass = 4.0;
      obj.friction_lo = 0.8;
      obj.friction_hi = 1.2;
      obj.pos_lo = {2.0, -1.2, 0};
      obj.pos_hi = {3.5, 1.2, 0};
      obj.yaw_lo = -0.3;
      obj.yaw_hi = 0.3;
      scene.objects.push_back(obj);
      break;
    }
    case TaskId::kKickBall: {
      // Standard football; sizes are documented artifact constants.
      obj.shape = ShapeKind::kSphere;
      obj.radius = 0.11;
      obj.mass = 0.45;
      obj.friction_lo = 0.1;
      obj.friction_hi = 0.15;
      obj.pos_lo = {0.9, -0.4, 0};
      obj.pos_hi = {1.5, 0.4, 0};
      scene.objects.push_back(obj);
      break;
    }
  }
  return scene;
}

}  // namespace keyloco::tasks
