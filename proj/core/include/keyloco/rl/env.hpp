#pragma once

#include <cstdint>
#include <vector>

#include "keyloco/rng.hpp"

namespace keyloco::rl {

using ObsVec = std::vector<float>;

struct StepResult {
  float reward = 0.0f;
  bool done = false;
};

// Single-writer environment; many instances step concurrently with no shared
// mutable state. All randomness (including policy sampling during rollouts)
// flows through the per-instance stream so results are scheduling-independent.
class Env {
 public:
  virtual ~Env() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  // Start the next episode (internal deterministic episode counter).
  virtual void reset() = 0;
  virtual const ObsVec& obs() const = 0;
  virtual StepResult step(const std::vector<float>& action) = 0;
  // Applied to sampled actions before they are stored or executed.
  virtual void clip_action(std::vector<float>& /*action*/) const {}
  virtual Rng& rng() = 0;
};

}  // namespace keyloco::rl
