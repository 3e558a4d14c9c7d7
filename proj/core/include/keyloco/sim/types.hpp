#pragma once

#include <array>
#include <string>
#include <vector>

#include "keyloco/math.hpp"

namespace keyloco::sim {

// Reduced humanoid: a root body plus five effector point masses
// (head, left hand, right hand, left foot, right foot).
struct PuppetState {
  Vec3 root_pos;
  double root_yaw = 0.0;
  Vec3 root_lin_vel;
  double root_yaw_rate = 0.0;
  std::array<Vec3, kNumEffectors> effector_pos{};
  std::array<Vec3, kNumEffectors> effector_vel{};
  bool fallen = false;

  bool finite() const {
    bool ok = root_pos.finite() && root_lin_vel.finite() &&
              std::isfinite(root_yaw) && std::isfinite(root_yaw_rate);
    for (int i = 0; i < kNumEffectors; ++i)
      ok = ok && effector_pos[i].finite() && effector_vel[i].finite();
    return ok;
  }
};

enum class ShapeKind { kBox, kSphere };

struct SceneObject {
  ShapeKind shape = ShapeKind::kBox;
  Vec3 half_extents;   // box only; yaw-aligned, no roll/pitch
  double radius = 0.0; // sphere only
  Vec3 pos;
  double yaw = 0.0;
  Vec3 vel;
  double yaw_rate = 0.0;
  double mass = 1.0;
  double friction = 0.5;
  // Magnitude of robot-applied contact force, averaged over the last control step.
  double contact_force = 0.0;

  double bottom_z() const {
    return shape == ShapeKind::kBox ? pos.z - half_extents.z : pos.z - radius;
  }
  double bounding_radius() const {
    return shape == ShapeKind::kBox ? half_extents.norm() : radius;
  }
  bool finite() const {
    return pos.finite() && vel.finite() && std::isfinite(yaw) && std::isfinite(yaw_rate);
  }
};

// 18 dims: 5 effector forces (N), planar root force (N), root yaw torque (N m).
struct LowLevelAction {
  std::array<Vec3, kNumEffectors> effector_force{};
  double root_force_x = 0.0, root_force_y = 0.0;
  double root_yaw_torque = 0.0;

  static constexpr double kEffectorForceLimit = 100.0;
  static constexpr double kRootForceLimit = 150.0;
  static constexpr double kYawTorqueLimit = 50.0;

  void clamp_to_bounds() {
    for (auto& f : effector_force) {
      f.x = clamp(f.x, -kEffectorForceLimit, kEffectorForceLimit);
      f.y = clamp(f.y, -kEffectorForceLimit, kEffectorForceLimit);
      f.z = clamp(f.z, -kEffectorForceLimit, kEffectorForceLimit);
    }
    root_force_x = clamp(root_force_x, -kRootForceLimit, kRootForceLimit);
    root_force_y = clamp(root_force_y, -kRootForceLimit, kRootForceLimit);
    root_yaw_torque = clamp(root_yaw_torque, -kYawTorqueLimit, kYawTorqueLimit);
  }

  // Normalized layout: [f_head, f_lhand, f_rhand, f_lfoot, f_rfoot, root_fx, root_fy, yaw_tau],
  // each dimension in [-1, 1] of its bound.
  static LowLevelAction from_normalized(const double* a) {
    LowLevelAction act;
    for (int i = 0; i < kNumEffectors; ++i) {
      act.effector_force[i] = Vec3(a[3 * i], a[3 * i + 1], a[3 * i + 2]) * kEffectorForceLimit;
    }
    act.root_force_x = a[15] * kRootForceLimit;
    act.root_force_y = a[16] * kRootForceLimit;
    act.root_yaw_torque = a[17] * kYawTorqueLimit;
    act.clamp_to_bounds();
    return act;
  }

  bool finite() const {
    for (const auto& f : effector_force)
      if (!f.finite()) return false;
    return std::isfinite(root_force_x) && std::isfinite(root_force_y) &&
           std::isfinite(root_yaw_torque);
  }
};

struct SimConfig {
  double dt_physics = 0.005;
  int substeps_per_control = 4;  // low level at 50 Hz
  double gravity = 9.81;
  double contact_kp = 5000.0;  // N/m
  double contact_kd = 50.0;    // N s/m
  double contact_kt = 200.0;   // tangential damping, Coulomb-capped

  double root_mass = 10.0;
  double root_drag = 40.0;
  double root_yaw_inertia = 1.5;
  double root_yaw_drag = 3.0;
  double root_radius = 0.18;  // collision proxy for the torso

  double effector_mass = 0.3;
  double effector_drag = 25.0;
  double effector_radius = 0.05;

  double rest_height = 0.8;
  double fall_height = 0.4;
  double support_kp = 400.0;  // root height servo while supported
  double support_kd = 120.0;
  double support_foot_height = 0.05;     // foot within 5 cm of ground
  double support_foot_horizontal = 0.4;  // and 40 cm of the root

  double ground_friction = 1.0;  // effector/root vs ground

  // PD setpoint control: policies command effector position targets and root
  // velocity targets; an inner PD loop converts them to bounded forces.
  double pd_kp = 400.0;        // effector position gain (N/m)
  double pd_kd = 10.0;         // effector velocity damping (N s/m)
  double pd_root_kv = 150.0;   // root velocity gain (N s/m)
  double pd_root_vmax = 2.0;   // commanded root speed at |a| = 1 (m/s)
  double pd_yaw_kw = 15.0;     // yaw rate gain (N m s)
  double pd_yaw_wmax = 3.0;    // commanded yaw rate at |a| = 1 (rad/s)

  std::array<double, kNumEffectors> reach{0.35, 0.85, 0.85, 0.55, 0.55};
  std::array<Vec3, kNumEffectors> anchor{
      Vec3{0.0, 0.0, 0.5},     // head
      Vec3{0.0, 0.25, 0.05},   // left hand
      Vec3{0.0, -0.25, 0.05},  // right hand
      Vec3{0.0, 0.12, -0.45},  // left foot
      Vec3{0.0, -0.12, -0.45}, // right foot
  };

  // Standing effector offsets from the root, world frame at yaw 0.
  std::array<Vec3, kNumEffectors> stand_offset{
      Vec3{0.0, 0.0, 0.5},
      Vec3{0.1, 0.25, -0.1},
      Vec3{0.1, -0.25, -0.1},
      Vec3{0.0, 0.12, -0.78},
      Vec3{0.0, -0.12, -0.78},
  };

  double control_dt() const { return dt_physics * substeps_per_control; }
};

struct ContactReport {
  std::array<double, kNumEffectors> effector_normal_force{};  // vs ground + objects
  std::array<bool, 2> foot_ground_contact{};                  // left, right
  std::vector<double> object_normal_force;  // per object, robot-applied magnitude
  double work_injected = 0.0;  // actuator work over the control step (J)
  bool supported = false;
};

}  // namespace keyloco::sim
