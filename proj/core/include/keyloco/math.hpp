#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace keyloco {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  double norm_xy() const { return std::sqrt(x * x + y * y); }
  Vec3 normalized(double eps = 1e-12) const {
    double n = norm();
    return n > eps ? *this / n : Vec3{0, 0, 0};
  }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Rotate about the z axis by yaw.
inline Vec3 yaw_rotate(double yaw, const Vec3& v) {
  double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

inline Vec3 yaw_unrotate(double yaw, const Vec3& v) {
  return yaw_rotate(-yaw, v);
}

inline double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline double sq(double v) { return v * v; }

constexpr double kInchToMeter = 0.0254;
constexpr int kNumEffectors = 5;
constexpr int kCommandDim = 18;  // root delta (3) + five effector deltas (15)

enum EffectorId { kHead = 0, kLeftHand = 1, kRightHand = 2, kLeftFoot = 3, kRightFoot = 4 };

}  // namespace keyloco
