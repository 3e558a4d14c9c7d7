#pragma once

#include <cstdint>
#include <vector>

namespace keyloco::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantage + value
};

// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
inline GaeResult compute_gae(const std::vector<double>& rewards,
                             const std::vector<double>& values,
                             const std::vector<uint8_t>& dones,
                             double bootstrap_value, double gamma, double lambda) {
  size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (size_t t = n; t-- > 0;) {
    double not_done = dones[t] ? 0.0 : 1.0;
    double delta = rewards[t] + gamma * next_value * not_done - values[t];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + values[t];
    next_value = values[t];
  }
  return out;
}

}  // namespace keyloco::rl
