#pragma once

#include <string>
#include <vector>

#include "keyloco/math.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::sim {

struct ObjectSpec {
  ShapeKind shape = ShapeKind::kBox;
  Vec3 half_extents;
  double radius = 0.0;
  double mass = 1.0;
  double friction_lo = 0.5, friction_hi = 0.5;
  Vec3 pos_lo, pos_hi;  // uniform initial-position range (z fixed to resting height)
  double yaw_lo = 0.0, yaw_hi = 0.0;
};

// A target point on an object surface, in the object's local (yaw) frame.
struct TargetPoint {
  int object_index = 0;
  Vec3 local;
};

struct SceneSpec {
  std::string task_id;
  std::vector<ObjectSpec> objects;
  std::vector<TargetPoint> target_points;
};

}  // namespace keyloco::sim
