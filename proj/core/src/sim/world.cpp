#include "keyloco/sim/world.hpp"

#include <cmath>
#include <stdexcept>

namespace keyloco::sim {

namespace {

struct Contact {
  bool hit = false;
  Vec3 normal;   // world frame, pointing away from the object
  double pen = 0.0;
  Vec3 point;
};

// Sphere (center c, radius r) against a yaw-aligned box or a sphere.
Contact sphere_vs_object(const Vec3& c, double r, const SceneObject& obj) {
  Contact ct;
  if (obj.shape == ShapeKind::kBox) {
    Vec3 local = yaw_unrotate(obj.yaw, c - obj.pos);
    Vec3 ext = obj.half_extents + Vec3{r, r, r};
    double sx = ext.x - std::abs(local.x);
    double sy = ext.y - std::abs(local.y);
    double sz = ext.z - std::abs(local.z);
    if (sx <= 0 || sy <= 0 || sz <= 0) return ct;
    ct.hit = true;
    Vec3 n_local;
    if (sx <= sy && sx <= sz) {
      ct.pen = sx;
      n_local = {local.x >= 0 ? 1.0 : -1.0, 0, 0};
    } else if (sy <= sz) {
      ct.pen = sy;
      n_local = {0, local.y >= 0 ? 1.0 : -1.0, 0};
    } else {
      ct.pen = sz;
      n_local = {0, 0, local.z >= 0 ? 1.0 : -1.0};
    }
    ct.normal = yaw_rotate(obj.yaw, n_local);
    ct.point = c - ct.normal * r;
  } else {
    Vec3 d = c - obj.pos;
    double dist = d.norm();
    double pen = obj.radius + r - dist;
    if (pen <= 0) return ct;
    ct.hit = true;
    ct.pen = pen;
    ct.normal = dist > 1e-9 ? d / dist : Vec3{0, 0, 1};
    ct.point = obj.pos + ct.normal * obj.radius;
  }
  return ct;
}

// Penalty normal + Coulomb-capped tangential damping at a contact.
// v_rel is the velocity of the touching body relative to the object surface.
Vec3 contact_force(const Contact& ct, const Vec3& v_rel, double mu,
                   const SimConfig& cfg, double* normal_mag = nullptr) {
  double vn = v_rel.dot(ct.normal);
  double n_mag = std::max(0.0, cfg.contact_kp * ct.pen - cfg.contact_kd * vn);
  Vec3 vt = v_rel - ct.normal * vn;
  Vec3 ft = vt * (-cfg.contact_kt);
  double ft_max = mu * n_mag;
  double ft_mag = ft.norm();
  if (ft_mag > ft_max && ft_mag > 1e-12) ft *= ft_max / ft_mag;
  if (normal_mag) *normal_mag = n_mag;
  return ct.normal * n_mag + ft;
}

Vec3 object_point_velocity(const SceneObject& obj, const Vec3& point) {
  Vec3 r = point - obj.pos;
  return obj.vel + Vec3{-obj.yaw_rate * r.y, obj.yaw_rate * r.x, 0};
}

double object_yaw_inertia(const SceneObject& obj) {
  if (obj.shape == ShapeKind::kBox) {
    return obj.mass * (sq(obj.half_extents.x * 2) + sq(obj.half_extents.y * 2)) / 12.0;
  }
  return 0.4 * obj.mass * sq(obj.radius);
}

}  // namespace

Vec3 object_ground_contact(const SceneObject& obj, const SimConfig& cfg) {
  if (!obj.finite()) throw std::invalid_argument("object_ground_contact: non-finite pose");
  double pen = -obj.bottom_z();
  if (pen <= 0) return {};
  double vn = obj.vel.z;
  double n_mag = std::max(0.0, cfg.contact_kp * pen - cfg.contact_kd * vn);
  Vec3 vt{obj.vel.x, obj.vel.y, 0};
  Vec3 ft = vt * (-cfg.contact_kt);
  double ft_max = obj.friction * n_mag;
  double ft_mag = ft.norm();
  if (ft_mag > ft_max && ft_mag > 1e-12) ft *= ft_max / ft_mag;
  return Vec3{0, 0, n_mag} + ft;
}

ContactReport step(PuppetState& state, std::vector<SceneObject>& objects,
                   const LowLevelAction& action, const SimConfig& cfg) {
  if (!state.finite() || !action.finite())
    throw std::invalid_argument("sim::step: non-finite input");
  if (state.fallen) throw std::invalid_argument("sim::step: state is terminal");
  for (const auto& o : objects)
    if (!o.finite()) throw std::invalid_argument("sim::step: non-finite object");

  ContactReport report;
  report.object_normal_force.assign(objects.size(), 0.0);
  const double dt = cfg.dt_physics;
  const int n_sub = cfg.substeps_per_control;

  for (auto& obj : objects) obj.contact_force = 0.0;

  for (int sub = 0; sub < n_sub; ++sub) {
    // Support proxy: at least one foot near ground and near the root.
    bool supported = false;
    for (int i = kLeftFoot; i <= kRightFoot; ++i) {
      const Vec3& f = state.effector_pos[i];
      double horiz = (f - state.root_pos).norm_xy();
      if (f.z <= cfg.support_foot_height && horiz <= cfg.support_foot_horizontal)
        supported = true;
    }
    report.supported = supported;

    std::array<Vec3, kNumEffectors> eff_force{};
    Vec3 root_force{action.root_force_x, action.root_force_y, 0};
    double root_tau = action.root_yaw_torque;
    std::vector<Vec3> obj_force(objects.size());
    std::vector<double> obj_tau(objects.size(), 0.0);
    std::vector<Vec3> robot_on_obj(objects.size());

    // Effector forces: action + gravity + drag + contacts.
    for (int i = 0; i < kNumEffectors; ++i) {
      Vec3 f = action.effector_force[i];
      f.z -= cfg.effector_mass * cfg.gravity;
      f -= state.effector_vel[i] * cfg.effector_drag;

      // Ground (point contact).
      double z = state.effector_pos[i].z;
      if (z < 0) {
        Contact ct;
        ct.hit = true;
        ct.pen = -z;
        ct.normal = {0, 0, 1};
        double n_mag = 0;
        Vec3 fg = contact_force(ct, state.effector_vel[i], cfg.ground_friction, cfg, &n_mag);
        f += fg;
        report.effector_normal_force[i] += n_mag / n_sub;
        if (i == kLeftFoot && n_mag > 0) report.foot_ground_contact[0] = true;
        if (i == kRightFoot && n_mag > 0) report.foot_ground_contact[1] = true;
      }

      // Objects (small-sphere contact).
      for (size_t k = 0; k < objects.size(); ++k) {
        Contact ct = sphere_vs_object(state.effector_pos[i], cfg.effector_radius, objects[k]);
        if (!ct.hit) continue;
        Vec3 v_rel = state.effector_vel[i] - object_point_velocity(objects[k], ct.point);
        double n_mag = 0;
        Vec3 fc = contact_force(ct, v_rel, objects[k].friction, cfg, &n_mag);
        f += fc;
        obj_force[k] -= fc;
        Vec3 r = ct.point - objects[k].pos;
        obj_tau[k] -= (r.cross(fc)).z;
        robot_on_obj[k] -= fc;
        report.effector_normal_force[i] += n_mag / n_sub;
      }
      eff_force[i] = f;
    }

    // Root: drag, height servo or gravity, torso-sphere contacts.
    root_force.x -= state.root_lin_vel.x * cfg.root_drag;
    root_force.y -= state.root_lin_vel.y * cfg.root_drag;
    root_force.z -= state.root_lin_vel.z * cfg.root_drag;
    double servo_fz = 0.0;
    if (supported) {
      servo_fz = cfg.support_kp * (cfg.rest_height - state.root_pos.z) -
                 cfg.support_kd * state.root_lin_vel.z;
      root_force.z += servo_fz;
    } else {
      root_force.z -= cfg.root_mass * cfg.gravity;
    }
    root_tau -= state.root_yaw_rate * cfg.root_yaw_drag;
    for (size_t k = 0; k < objects.size(); ++k) {
      Contact ct = sphere_vs_object(state.root_pos, cfg.root_radius, objects[k]);
      if (!ct.hit) continue;
      Vec3 v_rel = state.root_lin_vel - object_point_velocity(objects[k], ct.point);
      Vec3 fc = contact_force(ct, v_rel, objects[k].friction, cfg);
      root_force += fc;
      obj_force[k] -= fc;
      Vec3 r = ct.point - objects[k].pos;
      obj_tau[k] -= (r.cross(fc)).z;
      robot_on_obj[k] -= fc;
    }

    // Objects: gravity + ground.
    for (size_t k = 0; k < objects.size(); ++k) {
      obj_force[k].z -= objects[k].mass * cfg.gravity;
      Vec3 fg = object_ground_contact(objects[k], cfg);
      obj_force[k] += fg;
      // Yaw friction torque, capped by the Coulomb cone at an effective radius.
      double n_mag = std::max(0.0, fg.z);
      double r_eff = objects[k].shape == ShapeKind::kBox
                         ? 0.5 * (objects[k].half_extents.x + objects[k].half_extents.y)
                         : objects[k].radius;
      double tau_f = -20.0 * objects[k].yaw_rate;
      double tau_max = objects[k].friction * n_mag * r_eff;
      obj_tau[k] += clamp(tau_f, -tau_max, tau_max);
      report.object_normal_force[k] += robot_on_obj[k].norm() / n_sub;
      objects[k].contact_force += robot_on_obj[k].norm() / n_sub;
    }

    // Semi-implicit Euler.
    for (int i = 0; i < kNumEffectors; ++i) {
      state.effector_vel[i] += eff_force[i] * (dt / cfg.effector_mass);
      state.effector_pos[i] += state.effector_vel[i] * dt;
      report.work_injected += action.effector_force[i].dot(state.effector_vel[i]) * dt;
    }
    state.root_lin_vel += root_force * (dt / cfg.root_mass);
    state.root_yaw_rate += root_tau * (dt / cfg.root_yaw_inertia);
    state.root_pos += state.root_lin_vel * dt;
    state.root_yaw = wrap_angle(state.root_yaw + state.root_yaw_rate * dt);
    report.work_injected +=
        (Vec3{action.root_force_x, action.root_force_y, servo_fz}.dot(state.root_lin_vel) +
         action.root_yaw_torque * state.root_yaw_rate) * dt;

    for (size_t k = 0; k < objects.size(); ++k) {
      auto& obj = objects[k];
      obj.vel += obj_force[k] * (dt / obj.mass);
      obj.yaw_rate += obj_tau[k] * (dt / object_yaw_inertia(obj));
      obj.pos += obj.vel * dt;
      obj.yaw = wrap_angle(obj.yaw + obj.yaw_rate * dt);
    }

    // Reach projection (exact, effectors stay within reach of their anchors).
    for (int i = 0; i < kNumEffectors; ++i) {
      Vec3 center = state.root_pos + yaw_rotate(state.root_yaw, cfg.anchor[i]);
      Vec3 d = state.effector_pos[i] - center;
      double dist = d.norm();
      if (dist > cfg.reach[i]) {
        Vec3 dir = d / dist;
        state.effector_pos[i] = center + dir * cfg.reach[i];
        Vec3 rel_v = state.effector_vel[i] - state.root_lin_vel;
        double radial = rel_v.dot(dir);
        if (radial > 0) state.effector_vel[i] -= dir * radial;
      }
    }

    if (state.root_pos.z < cfg.fall_height) {
      state.fallen = true;
      break;
    }
  }

  if (!state.finite())
    throw std::runtime_error("sim::step: integration produced non-finite state");
  for (const auto& o : objects)
    if (!o.finite()) throw std::runtime_error("sim::step: non-finite object state");
  return report;
}

LowLevelAction pd_action(const PuppetState& state, const SimConfig& cfg,
                         const double* a) {
  LowLevelAction act;
  for (int i = 0; i < kNumEffectors; ++i) {
    // Target offset from the standing pose, yaw-local; the zero action holds
    // the stand. Clamped so the target stays inside the reach sphere.
    Vec3 off = Vec3{a[3 * i], a[3 * i + 1], a[3 * i + 2]} * cfg.reach[i];
    Vec3 rel = cfg.stand_offset[i] + off - cfg.anchor[i];
    double n = rel.norm();
    if (n > cfg.reach[i]) rel = rel * (cfg.reach[i] / n);
    Vec3 target = state.root_pos + yaw_rotate(state.root_yaw, cfg.anchor[i] + rel);
    Vec3 f = (target - state.effector_pos[i]) * cfg.pd_kp -
             state.effector_vel[i] * cfg.pd_kd;
    f.z += cfg.effector_mass * cfg.gravity;
    act.effector_force[i] = f;
  }
  act.root_force_x = (a[15] * cfg.pd_root_vmax - state.root_lin_vel.x) * cfg.pd_root_kv;
  act.root_force_y = (a[16] * cfg.pd_root_vmax - state.root_lin_vel.y) * cfg.pd_root_kv;
  act.root_yaw_torque = (a[17] * cfg.pd_yaw_wmax - state.root_yaw_rate) * cfg.pd_yaw_kw;
  act.clamp_to_bounds();
  return act;
}

PuppetState standing_state(const SimConfig& cfg, const Vec3& root_pos, double yaw) {
  PuppetState s;
  s.root_pos = root_pos;
  s.root_pos.z = cfg.rest_height;
  s.root_yaw = yaw;
  for (int i = 0; i < kNumEffectors; ++i)
    s.effector_pos[i] = s.root_pos + yaw_rotate(yaw, cfg.stand_offset[i]);
  return s;
}

PuppetState reset(const SceneSpec& scene, Rng& rng, const SimConfig& cfg,
                  std::vector<SceneObject>& objects_out) {
  objects_out.clear();
  for (const auto& spec : scene.objects) {
    SceneObject obj;
    obj.shape = spec.shape;
    obj.half_extents = spec.half_extents;
    obj.radius = spec.radius;
    obj.mass = spec.mass;
    bool placed = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      obj.friction = rng.uniform(spec.friction_lo, spec.friction_hi);
      obj.pos.x = rng.uniform(spec.pos_lo.x, spec.pos_hi.x);
      obj.pos.y = rng.uniform(spec.pos_lo.y, spec.pos_hi.y);
      obj.pos.z = obj.shape == ShapeKind::kBox ? obj.half_extents.z : obj.radius;
      obj.yaw = rng.uniform(spec.yaw_lo, spec.yaw_hi);
      bool overlap = obj.pos.norm_xy() < obj.bounding_radius() + 0.5;  // robot at origin
      for (const auto& other : objects_out) {
        double min_dist = obj.bounding_radius() + other.bounding_radius();
        if ((obj.pos - other.pos).norm_xy() < min_dist) overlap = true;
      }
      if (!overlap) {
        placed = true;
        break;
      }
    }
    if (!placed) throw std::runtime_error("sim::reset: could not place object without overlap");
    objects_out.push_back(obj);
  }
  return standing_state(cfg);
}

}  // namespace keyloco::sim
