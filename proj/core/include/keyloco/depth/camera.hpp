#pragma once

#include <array>
#include <string>
#include <vector>

#include "keyloco/math.hpp"
#include "keyloco/rng.hpp"

namespace keyloco::depth {

// 80x45 egocentric frame, values in [0,1]: 0 at/below the near clip (0.2 m),
// 1 at/beyond the far clip (4 m), linear in metric depth between.
struct DepthImage {
  static constexpr int kWidth = 80;
  static constexpr int kHeight = 45;
  static constexpr int kPixels = kWidth * kHeight;
  static constexpr double kNearClip = 0.2;
  static constexpr double kFarClip = 4.0;

  std::array<float, kPixels> px{};

  float& at(int x, int y) { return px[y * kWidth + x]; }
  float at(int x, int y) const { return px[y * kWidth + x]; }

  static float normalize(double metric) {
    return static_cast<float>(clamp((metric - kNearClip) / (kFarClip - kNearClip), 0.0, 1.0));
  }
  static double denormalize(float v) {
    return kNearClip + static_cast<double>(v) * (kFarClip - kNearClip);
  }
};

struct CameraSpec {
  Vec3 mount_offset{0.05, 0.0, 0.55};  // from root, root frame
  double base_pitch = 0.35;            // rad, positive looks down
  double hfov_deg = 87.0;
  double pitch_perturb = 0.0;  // per-episode, |x| <= 5 deg
  double yaw_perturb = 0.0;
};

// Resample the per-episode orientation perturbation, U(-5 deg, +5 deg).
CameraSpec perturb_camera(const CameraSpec& camera, Rng& rng);

struct MaskAugmentConfig {
  double p_corner = 0.20;
  int corner_w = 20, corner_h = 12;  // fixed bottom-left white mask
  double p_rect = 0.10;              // per slot
  int rect_slots = 6;
  int rect_max = 30;  // max side, pixels
  // Alternative reading: one p_rect gate spawns up to rect_slots rects.
  bool single_gate = false;
};

// Portable grayscale dump for visual inspection (binary PGM).
void write_pgm(const DepthImage& img, const std::string& path);

}  // namespace keyloco::depth
