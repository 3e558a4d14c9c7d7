#pragma once

#include <vector>

#include "keyloco/depth/camera.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::depth {

// Analytic raycast over {ground plane, yaw-aligned boxes, spheres}.
// Misses render at the far clip.
DepthImage render_depth(const sim::PuppetState& state,
                        const std::vector<sim::SceneObject>& objects,
                        const CameraSpec& camera);

// Masks applied in fixed order (corner, then slots) so overlaps reproduce.
DepthImage augment_depth(const DepthImage& img, const MaskAugmentConfig& cfg, Rng& rng);

}  // namespace keyloco::depth
