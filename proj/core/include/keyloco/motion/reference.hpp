#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "keyloco/math.hpp"
#include "keyloco/rng.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::motion {

struct RefFrame {
  Vec3 root_pos;
  double root_yaw = 0.0;
  std::array<Vec3, kNumEffectors> effector_pos{};
};

enum class MotionKind { kStand, kWalk, kReach, kKick, kLift, kSquatPush };

const char* motion_kind_name(MotionKind kind);

struct ReferenceMotion {
  double frame_dt = 0.02;
  std::vector<RefFrame> frames;
  MotionKind label = MotionKind::kStand;

  double duration() const { return frame_dt * (frames.size() - 1); }
  // Frame at time t, clamped to [0, duration].
  const RefFrame& at(double t) const;
};

// The 18-dim command: root position error + root-relative keypoint errors.
struct KeypointCommand {
  Vec3 delta_root;
  std::array<Vec3, kNumEffectors> delta_kp{};

  std::array<double, kCommandDim> flatten() const;
  static KeypointCommand unflatten(const double* v);
};

// K future frames over a 2 s horizon, relative to the current root pose.
struct TeacherGoal {
  static constexpr int kFrames = 10;
  static constexpr double kSpacing = 0.2;  // seconds
  struct GoalFrame {
    Vec3 root_offset;
    double yaw_offset = 0.0;
    std::array<Vec3, kNumEffectors> kp_offset{};
  };
  std::array<GoalFrame, kFrames> frames{};

  static constexpr int kDim = kFrames * (3 + 1 + 3 * kNumEffectors);
  void flatten(float* out) const;
};

struct MotionParams {
  double speed = 1.0;          // m/s, walk / squat_push
  double heading = 0.0;        // radians
  double target_height = 1.0;  // m, lift endpoint
  double kick_length = 0.4;    // m
  double kick_duration = 0.3;  // s
  int kick_foot = kRightFoot;
  Vec3 start_pos;
  double start_yaw = 0.0;
};

// Kinematically feasible procedural motions for the puppet.
// Throws std::invalid_argument for infeasible params or duration < 1 s.
ReferenceMotion generate_motion(MotionKind kind, const MotionParams& params,
                                double duration, const keyloco::sim::SimConfig& cfg);

KeypointCommand keypoint_command(const RefFrame& ref, const keyloco::sim::PuppetState& cur);

TeacherGoal future_window(const ReferenceMotion& motion, double t,
                          const keyloco::sim::PuppetState& cur);

// Text table: one frame per line with 21 numbers (root 3, yaw 1, effectors 15).
void export_motion(const ReferenceMotion& motion, std::ostream& os);
ReferenceMotion import_motion(std::istream& is);

}  // namespace keyloco::motion
