#include "keyloco/motion/reference.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "keyloco/sim/world.hpp"

namespace keyloco::motion {

using sim::SimConfig;

const char* motion_kind_name(MotionKind kind) {
  switch (kind) {
    case MotionKind::kStand: return "stand";
    case MotionKind::kWalk: return "walk";
    case MotionKind::kReach: return "reach";
    case MotionKind::kKick: return "kick";
    case MotionKind::kLift: return "lift";
    case MotionKind::kSquatPush: return "squat_push";
  }
  return "unknown";
}

const RefFrame& ReferenceMotion::at(double t) const {
  double clamped = clamp(t, 0.0, duration());
  size_t idx = static_cast<size_t>(std::lround(clamped / frame_dt));
  if (idx >= frames.size()) idx = frames.size() - 1;
  return frames[idx];
}

std::array<double, kCommandDim> KeypointCommand::flatten() const {
  std::array<double, kCommandDim> out;
  out[0] = delta_root.x;
  out[1] = delta_root.y;
  out[2] = delta_root.z;
  for (int i = 0; i < kNumEffectors; ++i) {
    out[3 + 3 * i] = delta_kp[i].x;
    out[4 + 3 * i] = delta_kp[i].y;
    out[5 + 3 * i] = delta_kp[i].z;
  }
  return out;
}

KeypointCommand KeypointCommand::unflatten(const double* v) {
  KeypointCommand c;
  c.delta_root = {v[0], v[1], v[2]};
  for (int i = 0; i < kNumEffectors; ++i)
    c.delta_kp[i] = {v[3 + 3 * i], v[4 + 3 * i], v[5 + 3 * i]};
  return c;
}

void TeacherGoal::flatten(float* out) const {
  int k = 0;
  for (const auto& f : frames) {
    out[k++] = static_cast<float>(f.root_offset.x);
    out[k++] = static_cast<float>(f.root_offset.y);
    out[k++] = static_cast<float>(f.root_offset.z);
    out[k++] = static_cast<float>(f.yaw_offset);
    for (const auto& kp : f.kp_offset) {
      out[k++] = static_cast<float>(kp.x);
      out[k++] = static_cast<float>(kp.y);
      out[k++] = static_cast<float>(kp.z);
    }
  }
}

namespace {

// Smooth 0->1 ramp.
double smooth(double u) { return 0.5 * (1.0 - std::cos(M_PI * clamp(u, 0.0, 1.0))); }

RefFrame standing_frame(const SimConfig& cfg, const Vec3& root_xy, double yaw) {
  RefFrame f;
  f.root_pos = {root_xy.x, root_xy.y, cfg.rest_height};
  f.root_yaw = yaw;
  for (int i = 0; i < kNumEffectors; ++i)
    f.effector_pos[i] = f.root_pos + yaw_rotate(yaw, cfg.stand_offset[i]);
  return f;
}

void check_reach(const ReferenceMotion& motion, const SimConfig& cfg) {
  for (const auto& f : motion.frames) {
    for (int i = 0; i < kNumEffectors; ++i) {
      Vec3 center = f.root_pos + yaw_rotate(f.root_yaw, cfg.anchor[i]);
      double d = (f.effector_pos[i] - center).norm();
      if (d > cfg.reach[i] + 1e-9)
        throw std::logic_error("generate_motion: frame violates reach constraint");
      if (!f.root_pos.finite() || !f.effector_pos[i].finite())
        throw std::logic_error("generate_motion: non-finite frame");
    }
  }
}

}  // namespace

ReferenceMotion generate_motion(MotionKind kind, const MotionParams& params,
                                double duration, const SimConfig& cfg) {
  if (duration < 1.0) throw std::invalid_argument("generate_motion: duration < 1 s");
  if (kind == MotionKind::kWalk || kind == MotionKind::kSquatPush) {
    if (params.speed < 0.0 || params.speed > 1.6)
      throw std::invalid_argument("generate_motion: speed outside [0, 1.6] m/s");
  }
  if (kind == MotionKind::kLift &&
      (params.target_height < 0.5 || params.target_height > 1.1))
    throw std::invalid_argument("generate_motion: lift height outside [0.5, 1.1] m");

  ReferenceMotion motion;
  motion.label = kind;
  int n = static_cast<int>(std::lround(duration / motion.frame_dt)) + 1;
  motion.frames.reserve(n);

  const double yaw = kind == MotionKind::kWalk || kind == MotionKind::kSquatPush
                         ? params.heading
                         : params.start_yaw;
  const Vec3 fwd = yaw_rotate(yaw, Vec3{1, 0, 0});

  for (int fi = 0; fi < n; ++fi) {
    double t = fi * motion.frame_dt;
    RefFrame f;
    switch (kind) {
      case MotionKind::kStand:
        f = standing_frame(cfg, params.start_pos, params.start_yaw);
        break;

      case MotionKind::kWalk:
      case MotionKind::kSquatPush: {
        // Speed ramps in over 0.5 s; sinusoidal stepping gait.
        double ramp_t = 0.5;
        double dist = t < ramp_t
                          ? params.speed * t * t / (2 * ramp_t)
                          : params.speed * (t - ramp_t / 2);
        Vec3 root_xy = params.start_pos + fwd * dist;
        f = standing_frame(cfg, root_xy, yaw);
        double freq = 1.5;  // Hz
        double stride = clamp(params.speed * 0.12, 0.0, 0.14);
        double lift = params.speed > 0.05 ? 0.06 : 0.0;
        double gait = smooth(t / ramp_t);  // ease the gait in with the speed
        for (int foot = kLeftFoot; foot <= kRightFoot; ++foot) {
          double phase = 2 * M_PI * freq * t + (foot == kLeftFoot ? 0.0 : M_PI);
          Vec3 off = fwd * (gait * stride * std::sin(phase));
          off.z = gait * lift * std::max(0.0, std::sin(phase + M_PI / 2));
          f.effector_pos[foot] += off;
        }
        // Arm swing, opposite phase to the same-side foot.
        for (int hand = kLeftHand; hand <= kRightHand; ++hand) {
          double phase = 2 * M_PI * freq * t + (hand == kLeftHand ? M_PI : 0.0);
          f.effector_pos[hand] += fwd * (gait * 0.08 * std::sin(phase));
        }
        if (kind == MotionKind::kSquatPush) {
          // Hands held forward at push height instead of swinging.
          for (int hand = kLeftHand; hand <= kRightHand; ++hand) {
            Vec3 local = cfg.stand_offset[hand];
            local.x = 0.4;
            local.z = -0.15;
            f.effector_pos[hand] = f.root_pos + yaw_rotate(yaw, local);
          }
        }
        break;
      }

      case MotionKind::kReach: {
        f = standing_frame(cfg, params.start_pos, yaw);
        double u = smooth((t - 0.5) / 1.0);
        for (int hand = kLeftHand; hand <= kRightHand; ++hand) {
          Vec3 rest = cfg.stand_offset[hand];
          Vec3 out = rest;
          out.x = 0.45;
          out.z = params.target_height - cfg.rest_height;
          Vec3 local = rest + (out - rest) * u;
          f.effector_pos[hand] = f.root_pos + yaw_rotate(yaw, local);
        }
        break;
      }

      case MotionKind::kKick: {
        f = standing_frame(cfg, params.start_pos, yaw);
        double t0 = 1.0;
        int foot = params.kick_foot;
        double sweep = 0.0;
        if (t >= t0 && t < t0 + params.kick_duration) {
          sweep = smooth((t - t0) / params.kick_duration);
        } else if (t >= t0 + params.kick_duration &&
                   t < t0 + 2 * params.kick_duration) {
          sweep = 1.0 - smooth((t - t0 - params.kick_duration) / params.kick_duration);
        }
        Vec3 local = cfg.stand_offset[foot];
        local.x += sweep * params.kick_length;
        local.z += sweep * 0.12;  // lift the foot through the sweep
        f.effector_pos[foot] = f.root_pos + yaw_rotate(yaw, local);
        break;
      }

      case MotionKind::kLift: {
        f = standing_frame(cfg, params.start_pos, yaw);
        double u = smooth((t - 0.5) / 1.5);
        double h = 0.3 + (params.target_height - 0.3) * u;
        for (int hand = kLeftHand; hand <= kRightHand; ++hand) {
          Vec3 local = cfg.stand_offset[hand];
          local.x = 0.35;
          local.z = h - cfg.rest_height;
          f.effector_pos[hand] = f.root_pos + yaw_rotate(yaw, local);
        }
        break;
      }
    }
    motion.frames.push_back(f);
  }

  check_reach(motion, cfg);
  return motion;
}

KeypointCommand keypoint_command(const RefFrame& ref, const sim::PuppetState& cur) {
  KeypointCommand c;
  c.delta_root = ref.root_pos - cur.root_pos;
  for (int i = 0; i < kNumEffectors; ++i) {
    c.delta_kp[i] = (ref.effector_pos[i] - ref.root_pos) -
                    (cur.effector_pos[i] - cur.root_pos);
  }
  return c;
}

TeacherGoal future_window(const ReferenceMotion& motion, double t,
                          const sim::PuppetState& cur) {
  TeacherGoal goal;
  for (int k = 0; k < TeacherGoal::kFrames; ++k) {
    const RefFrame& ref = motion.at(t + (k + 1) * TeacherGoal::kSpacing);
    auto& g = goal.frames[k];
    g.root_offset = ref.root_pos - cur.root_pos;
    g.yaw_offset = wrap_angle(ref.root_yaw - cur.root_yaw);
    for (int i = 0; i < kNumEffectors; ++i) {
      g.kp_offset[i] = (ref.effector_pos[i] - ref.root_pos) -
                       (cur.effector_pos[i] - cur.root_pos);
    }
  }
  return goal;
}

void export_motion(const ReferenceMotion& motion, std::ostream& os) {
  os << "# keyloco-motion v1 frame_dt=" << motion.frame_dt
     << " label=" << motion_kind_name(motion.label) << "\n";
  os.precision(17);
  for (const auto& f : motion.frames) {
    os << f.root_pos.x << " " << f.root_pos.y << " " << f.root_pos.z << " "
       << f.root_yaw;
    for (const auto& x : f.effector_pos)
      os << " " << x.x << " " << x.y << " " << x.z;
    os << "\n";
  }
}

ReferenceMotion import_motion(std::istream& is) {
  ReferenceMotion motion;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("frame_dt=");
      if (pos != std::string::npos)
        motion.frame_dt = std::stod(line.substr(pos + 9));
      continue;
    }
    std::istringstream ss(line);
    RefFrame f;
    ss >> f.root_pos.x >> f.root_pos.y >> f.root_pos.z >> f.root_yaw;
    for (auto& x : f.effector_pos) ss >> x.x >> x.y >> x.z;
    if (!ss) throw std::runtime_error("import_motion: malformed frame line");
    motion.frames.push_back(f);
  }
  if (motion.frames.size() < 2)
    throw std::runtime_error("import_motion: motion needs at least 2 frames");
  return motion;
}

}  // namespace keyloco::motion
