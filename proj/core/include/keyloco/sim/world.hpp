#pragma once

#include <vector>

#include "keyloco/rng.hpp"
#include "keyloco/sim/scene.hpp"
#include "keyloco/sim/types.hpp"

namespace keyloco::sim {

// One low-level control step: substeps of semi-implicit Euler with penalty
// contacts, then effector reach projection. Throws std::invalid_argument on
// non-finite inputs and std::runtime_error if the integration produces NaN.
ContactReport step(PuppetState& state, std::vector<SceneObject>& objects,
                   const LowLevelAction& action, const SimConfig& cfg);

// Ground reaction on an object (normal penalty + Coulomb-capped tangential).
Vec3 object_ground_contact(const SceneObject& obj, const SimConfig& cfg);

// Map a normalized policy action (18 values in [-1, 1]) to PD forces:
// per-effector position targets inside the reach sphere (yaw-local, relative
// to the anchor), a planar root velocity target, and a yaw rate target.
// Gravity-compensated; the result is clamped to LowLevelAction bounds.
LowLevelAction pd_action(const PuppetState& state, const SimConfig& cfg,
                         const double* a);

// Puppet at standing pose, objects sampled from the spec ranges.
// Throws std::runtime_error if placements cannot be de-overlapped in 100 tries.
PuppetState reset(const SceneSpec& scene, Rng& rng, const SimConfig& cfg,
                  std::vector<SceneObject>& objects_out);

PuppetState standing_state(const SimConfig& cfg, const Vec3& root_pos = Vec3{},
                           double yaw = 0.0);

}  // namespace keyloco::sim
