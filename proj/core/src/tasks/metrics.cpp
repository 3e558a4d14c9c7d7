#include "keyloco/tasks/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "keyloco/tasks/scenes.hpp"

namespace keyloco::tasks {

using sim::SceneObject;
using sim::ShapeKind;

namespace {

constexpr int kObjectCols = 10;  // pos 3, yaw 1, vel 3, yaw_rate 1, contact 1, pad 1

void put(std::ostream& os, double v) {
  os << std::setprecision(17) << v << ",";
}

// Penetration depth of the torso sphere (root) into an object, metres.
double robot_object_penetration(const sim::PuppetState& state, const SceneObject& obj,
                                double root_radius) {
  if (obj.shape == ShapeKind::kSphere) {
    double d = (state.root_pos - obj.pos).norm();
    return (root_radius + obj.radius) - d;
  }
  Vec3 local = yaw_unrotate(obj.yaw, state.root_pos - obj.pos);
  Vec3 closest{clamp(local.x, -obj.half_extents.x, obj.half_extents.x),
               clamp(local.y, -obj.half_extents.y, obj.half_extents.y),
               clamp(local.z, -obj.half_extents.z, obj.half_extents.z)};
  double d = (local - closest).norm();
  if (d > 1e-9) return root_radius - d;
  // Root centre inside the box: penetration is radius plus escape distance.
  double slack = obj.half_extents.x - std::abs(local.x);
  slack = std::min(slack, obj.half_extents.y - std::abs(local.y));
  slack = std::min(slack, obj.half_extents.z - std::abs(local.z));
  return root_radius + slack;
}

Vec3 target_world(const SceneObject& obj, const Vec3& local) {
  return obj.pos + yaw_rotate(obj.yaw, local);
}

}  // namespace

void TrajectoryLog::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("trajectory log: cannot open " + path);
  size_t n_obj = rows.empty() ? 0 : rows.front().objects.size();
  os << "# keyloco-traj v1 task=" << task << " dt=" << std::setprecision(17) << dt
     << " objects=" << n_obj << "\n";
  os << "time,root_x,root_y,root_z,root_yaw,vel_x,vel_y,vel_z,yaw_rate,fallen,";
  static const char* eff[] = {"head", "lhand", "rhand", "lfoot", "rfoot"};
  for (const char* e : eff) os << e << "_x," << e << "_y," << e << "_z,";
  for (size_t i = 0; i < n_obj; ++i) {
    os << "obj" << i << "_x,obj" << i << "_y,obj" << i << "_z,obj" << i << "_yaw,"
       << "obj" << i << "_vx,obj" << i << "_vy,obj" << i << "_vz,obj" << i
       << "_yaw_rate,obj" << i << "_force,obj" << i << "_pad,";
  }
  os << "r_approach,r_forward,r_force,r_look,r_drift,r_height,r_velocity,r_pause,"
        "r_total,";
  for (int i = 0; i < 18; ++i) os << "a" << i << ",";
  os << "binary_cmd\n";

  for (const auto& row : rows) {
    if (row.objects.size() != n_obj)
      throw std::runtime_error("trajectory log: inconsistent object count");
    put(os, row.time);
    put(os, row.state.root_pos.x);
    put(os, row.state.root_pos.y);
    put(os, row.state.root_pos.z);
    put(os, row.state.root_yaw);
    put(os, row.state.root_lin_vel.x);
    put(os, row.state.root_lin_vel.y);
    put(os, row.state.root_lin_vel.z);
    put(os, row.state.root_yaw_rate);
    os << (row.state.fallen ? 1 : 0) << ",";
    for (const auto& p : row.state.effector_pos) {
      put(os, p.x);
      put(os, p.y);
      put(os, p.z);
    }
    for (const auto& obj : row.objects) {
      put(os, obj.pos.x);
      put(os, obj.pos.y);
      put(os, obj.pos.z);
      put(os, obj.yaw);
      put(os, obj.vel.x);
      put(os, obj.vel.y);
      put(os, obj.vel.z);
      put(os, obj.yaw_rate);
      put(os, obj.contact_force);
      put(os, 0.0);
    }
    put(os, row.reward.approach);
    put(os, row.reward.forward);
    put(os, row.reward.force);
    put(os, row.reward.look);
    put(os, row.reward.drift);
    put(os, row.reward.height);
    put(os, row.reward.velocity);
    put(os, row.reward.pause);
    put(os, row.reward.total);
    for (double a : row.action) put(os, a);
    os << row.binary_cmd << "\n";
  }
}

TrajectoryLog TrajectoryLog::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("trajectory log: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# keyloco-traj v1 ", 0) != 0)
    throw std::runtime_error("trajectory log: bad header in " + path);

  TrajectoryLog log;
  size_t n_obj = 0;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "task") log.task = val;
      else if (key == "dt") log.dt = std::stod(val);
      else if (key == "objects") n_obj = std::stoul(val);
    }
  }
  if (!std::getline(is, line)) throw std::runtime_error("trajectory log: missing columns");

  const size_t expected = 10 + 15 + n_obj * kObjectCols + 9 + 18 + 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    f.reserve(expected);
    std::istringstream rs(line);
    std::string cell;
    while (std::getline(rs, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() != expected)
      throw std::runtime_error("trajectory log: truncated row in " + path);
    TrajectoryRow row;
    size_t k = 0;
    row.time = f[k++];
    row.state.root_pos = {f[k], f[k + 1], f[k + 2]};
    k += 3;
    row.state.root_yaw = f[k++];
    row.state.root_lin_vel = {f[k], f[k + 1], f[k + 2]};
    k += 3;
    row.state.root_yaw_rate = f[k++];
    row.state.fallen = f[k++] != 0.0;
    for (auto& p : row.state.effector_pos) {
      p = {f[k], f[k + 1], f[k + 2]};
      k += 3;
    }
    row.objects.resize(n_obj);
    for (auto& obj : row.objects) {
      obj.pos = {f[k], f[k + 1], f[k + 2]};
      k += 3;
      obj.yaw = f[k++];
      obj.vel = {f[k], f[k + 1], f[k + 2]};
      k += 3;
      obj.yaw_rate = f[k++];
      obj.contact_force = f[k++];
      ++k;  // pad
    }
    row.reward.approach = f[k++];
    row.reward.forward = f[k++];
    row.reward.force = f[k++];
    row.reward.look = f[k++];
    row.reward.drift = f[k++];
    row.reward.height = f[k++];
    row.reward.velocity = f[k++];
    row.reward.pause = f[k++];
    row.reward.total = f[k++];
    for (auto& a : row.action) a = f[k++];
    row.binary_cmd = static_cast<int>(f[k++]);
    log.rows.push_back(std::move(row));
  }
  return log;
}

EpisodeMetrics compute_metrics(const TrajectoryLog& log, TaskId task) {
  if (log.rows.empty()) throw std::invalid_argument("compute_metrics: empty log");
  const auto scene = make_scene(task);
  const auto& geom = scene.objects.at(0);
  for (const auto& row : log.rows)
    if (row.objects.empty())
      throw std::invalid_argument("compute_metrics: log row without objects");

  const sim::SimConfig sim_cfg;
  const auto& first = log.rows.front();
  const auto& last = log.rows.back();

  EpisodeMetrics m;
  Vec3 disp = last.objects[0].pos - first.objects[0].pos;
  m.distance = disp.norm_xy();
  m.forward = disp.x;
  m.drift = std::abs(disp.y);

  double bottom0 = first.objects[0].bottom_z();
  double max_lift = 0.0;
  double sum_vel = 0.0;
  double finish = -1.0;
  bool fallen_seen = false;
  m.alive = log.episode_length();

  for (const auto& row : log.rows) {
    const auto& obj = row.objects[0];
    double bottom = obj.bottom_z();
    m.height = std::max(m.height, bottom);
    max_lift = std::max(max_lift, bottom - bottom0);
    m.force = std::max(m.force, obj.contact_force);
    if (!fallen_seen && row.state.fallen) {
      fallen_seen = true;
      m.alive = row.time;
    }
    if (robot_object_penetration(row.state, obj, sim_cfg.root_radius) > 0.02)
      m.collision = true;

    Vec3 to_obj = obj.pos - row.state.root_pos;
    double d = to_obj.norm_xy();
    if (d > 1e-9)
      sum_vel += (row.state.root_lin_vel.x * to_obj.x +
                  row.state.root_lin_vel.y * to_obj.y) /
                 d;

    // Reach completion: root within 0.6 m of the standoff ring around the box.
    double standoff = obj.bounding_radius() + 0.5;
    if (finish < 0 && std::abs(d - standoff) < 0.6 && !row.state.fallen)
      finish = row.time;
  }
  m.velocity = sum_vel / static_cast<double>(log.rows.size());
  m.finish_time = finish >= 0 ? finish : log.episode_length();
  // Dropped after a clear lift: came back to within 5 cm of its start height.
  m.box_fall = max_lift > 0.15 && (last.objects[0].bottom_z() - bottom0) < 0.05;

  // Final distance from the relevant effector to the nearest target point
  // (object centre when no target points), in centimetres.
  bool use_feet = task == TaskId::kKickBox || task == TaskId::kKickBall;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Vec3> targets;
  for (const auto& tp : scene.target_points)
    targets.push_back(target_world(last.objects[tp.object_index], tp.local));
  if (targets.empty()) targets.push_back(last.objects[0].pos);
  (void)geom;
  for (const auto& t : targets) {
    if (use_feet) {
      best = std::min(best, (last.state.effector_pos[kLeftFoot] - t).norm());
      best = std::min(best, (last.state.effector_pos[kRightFoot] - t).norm());
    } else {
      best = std::min(best, (last.state.effector_pos[kLeftHand] - t).norm());
      best = std::min(best, (last.state.effector_pos[kRightHand] - t).norm());
    }
  }
  m.error = best * 100.0;
  return m;
}

namespace {

std::vector<double> metric_values(const EpisodeMetrics& m) {
  return {m.distance, m.forward,  m.drift,     m.height,
          m.box_fall ? 1.0 : 0.0, m.alive,     m.velocity,
          m.collision ? 1.0 : 0.0, m.error,    m.finish_time,
          m.force};
}

EpisodeMetrics from_values(const std::vector<double>& v) {
  EpisodeMetrics m;
  m.distance = v[0];
  m.forward = v[1];
  m.drift = v[2];
  m.height = v[3];
  m.box_fall = v[4] > 0.5;
  m.alive = v[5];
  m.velocity = v[6];
  m.collision = v[7] > 0.5;
  m.error = v[8];
  m.finish_time = v[9];
  m.force = v[10];
  return m;
}

}  // namespace

MetricsSummary summarize(const std::vector<EpisodeMetrics>& episodes) {
  MetricsSummary s;
  s.episodes = static_cast<int>(episodes.size());
  if (episodes.empty()) return s;
  const size_t n_fields = metric_values(episodes.front()).size();
  std::vector<double> mean(n_fields, 0.0), var(n_fields, 0.0);
  for (const auto& ep : episodes) {
    auto v = metric_values(ep);
    for (size_t i = 0; i < n_fields; ++i) mean[i] += v[i];
  }
  for (auto& x : mean) x /= static_cast<double>(episodes.size());
  for (const auto& ep : episodes) {
    auto v = metric_values(ep);
    for (size_t i = 0; i < n_fields; ++i) var[i] += sq(v[i] - mean[i]);
  }
  std::vector<double> sd(n_fields);
  for (size_t i = 0; i < n_fields; ++i)
    sd[i] = std::sqrt(var[i] / static_cast<double>(episodes.size()));
  s.mean = from_values(mean);
  s.stddev = from_values(sd);
  s.box_fall_rate = mean[4];
  s.collision_rate = mean[7];
  return s;
}

std::string metrics_csv_header() {
  return "task,policy,episodes,"
         "distance_mean,distance_std,forward_mean,forward_std,drift_mean,drift_std,"
         "height_mean,height_std,box_fall_rate,alive_mean,alive_std,"
         "velocity_mean,velocity_std,collision_rate,error_mean,error_std,"
         "finish_time_mean,finish_time_std,force_mean,force_std";
}

std::string metrics_csv_row(const std::string& task, const std::string& policy,
                            const MetricsSummary& s) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << task << "," << policy << "," << s.episodes << "," << s.mean.distance << ","
     << s.stddev.distance << "," << s.mean.forward << "," << s.stddev.forward << ","
     << s.mean.drift << "," << s.stddev.drift << "," << s.mean.height << ","
     << s.stddev.height << "," << s.box_fall_rate << "," << s.mean.alive << ","
     << s.stddev.alive << "," << s.mean.velocity << "," << s.stddev.velocity << ","
     << s.collision_rate << "," << s.mean.error << "," << s.stddev.error << ","
     << s.mean.finish_time << "," << s.stddev.finish_time << "," << s.mean.force
     << "," << s.stddev.force;
  return os.str();
}

}  // namespace keyloco::tasks
