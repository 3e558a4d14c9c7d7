#include "keyloco/depth/render.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace keyloco::depth {

using sim::SceneObject;
using sim::ShapeKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ray_ground(const Vec3& origin, const Vec3& dir) {
  if (dir.z >= -1e-12) return kInf;
  double t = -origin.z / dir.z;
  return t > 0 ? t : kInf;
}

double ray_sphere(const Vec3& origin, const Vec3& dir, const Vec3& center, double r) {
  Vec3 oc = origin - center;
  double b = oc.dot(dir);
  double c = oc.norm2() - r * r;
  double disc = b * b - c;
  if (disc < 0) return kInf;
  double s = std::sqrt(disc);
  double t = -b - s;
  if (t > 0) return t;
  t = -b + s;
  return t > 0 ? t : kInf;
}

// Slab test in the box's yaw frame.
double ray_box(const Vec3& origin, const Vec3& dir, const SceneObject& box) {
  Vec3 o = yaw_unrotate(box.yaw, origin - box.pos);
  Vec3 d = yaw_unrotate(box.yaw, dir);
  double tmin = -kInf, tmax = kInf;
  const double od[3] = {o.x, o.y, o.z};
  const double dd[3] = {d.x, d.y, d.z};
  const double hd[3] = {box.half_extents.x, box.half_extents.y, box.half_extents.z};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dd[a]) < 1e-12) {
      if (std::abs(od[a]) > hd[a]) return kInf;
      continue;
    }
    double t1 = (-hd[a] - od[a]) / dd[a];
    double t2 = (hd[a] - od[a]) / dd[a];
    if (t1 > t2) std::swap(t1, t2);
    tmin = std::max(tmin, t1);
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return kInf;
  }
  if (tmax < 0) return kInf;
  return tmin > 0 ? tmin : tmax;
}

}  // namespace

DepthImage render_depth(const sim::PuppetState& state,
                        const std::vector<SceneObject>& objects,
                        const CameraSpec& camera) {
  DepthImage img;
  Vec3 origin = state.root_pos + yaw_rotate(state.root_yaw, camera.mount_offset);
  double yaw = state.root_yaw + camera.yaw_perturb;
  double pitch = camera.base_pitch + camera.pitch_perturb;

  Vec3 fwd{std::cos(yaw) * std::cos(pitch), std::sin(yaw) * std::cos(pitch),
           -std::sin(pitch)};
  Vec3 right = fwd.cross(Vec3{0, 0, 1}).normalized();
  Vec3 down = fwd.cross(right);

  double focal = (DepthImage::kWidth / 2.0) /
                 std::tan(camera.hfov_deg * M_PI / 180.0 / 2.0);

  for (int y = 0; y < DepthImage::kHeight; ++y) {
    for (int x = 0; x < DepthImage::kWidth; ++x) {
      double cx = (x + 0.5 - DepthImage::kWidth / 2.0) / focal;
      double cy = (y + 0.5 - DepthImage::kHeight / 2.0) / focal;
      Vec3 dir = (fwd + right * cx + down * cy).normalized();
      double t = ray_ground(origin, dir);
      for (const auto& obj : objects) {
        double to = obj.shape == ShapeKind::kBox
                        ? ray_box(origin, dir, obj)
                        : ray_sphere(origin, dir, obj.pos, obj.radius);
        t = std::min(t, to);
      }
      img.at(x, y) = DepthImage::normalize(std::min(t, DepthImage::kFarClip));
    }
  }
  return img;
}

DepthImage augment_depth(const DepthImage& img, const MaskAugmentConfig& cfg, Rng& rng) {
  DepthImage out = img;
  auto fill_rect = [&out](int x0, int y0, int w, int h, float v) {
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) out.at(x, y) = v;
  };

  if (rng.uniform(0.0, 1.0) < cfg.p_corner) {
    fill_rect(0, DepthImage::kHeight - cfg.corner_h, cfg.corner_w, cfg.corner_h, 1.0f);
  }

  bool gate_open = true;
  if (cfg.single_gate) gate_open = rng.uniform(0.0, 1.0) < cfg.p_rect;
  for (int slot = 0; slot < cfg.rect_slots; ++slot) {
    bool active = cfg.single_gate ? gate_open : rng.uniform(0.0, 1.0) < cfg.p_rect;
    if (!active) continue;
    int w = 1 + static_cast<int>(rng.index(cfg.rect_max));
    int h = 1 + static_cast<int>(rng.index(cfg.rect_max));
    int x0 = static_cast<int>(rng.index(DepthImage::kWidth - w + 1));
    int y0 = static_cast<int>(rng.index(DepthImage::kHeight - h + 1));
    int kind = static_cast<int>(rng.index(3));
    float v = kind == 0 ? 1.0f : kind == 1 ? 0.0f
                                           : static_cast<float>(rng.uniform(0.0, 1.0));
    fill_rect(x0, y0, w, h, v);
  }
  return out;
}

CameraSpec perturb_camera(const CameraSpec& camera, Rng& rng) {
  constexpr double kMax = 5.0 * M_PI / 180.0;
  CameraSpec out = camera;
  out.pitch_perturb = rng.uniform(-kMax, kMax);
  out.yaw_perturb = rng.uniform(-kMax, kMax);
  return out;
}

void write_pgm(const DepthImage& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
  os << "P5\n" << DepthImage::kWidth << " " << DepthImage::kHeight << "\n255\n";
  for (float v : img.px)
    os.put(static_cast<char>(static_cast<unsigned char>(clamp(v, 0.0f, 1.0f) * 255.0f)));
}

}  // namespace keyloco::depth
