#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "keyloco/nn/adam.hpp"
#include "keyloco/nn/mlp.hpp"
#include "keyloco/nn/policy.hpp"
#include "keyloco/rl/env.hpp"

namespace keyloco::rl {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  int epochs = 5;
  int minibatches = 4;
  double value_coef = 0.5;
  double entropy_coef = 0.005;
  int horizon = 64;
  int num_envs = 256;
  int64_t total_env_steps = 2'000'000;
  double lr = 3e-4;
  double max_grad_norm = 0.5;
  int hidden = 256;
  double init_std = 0.3;  // initial per-dimension action std (normalized units)
};

// env-major, time-minor: index = env * horizon + t.
struct RolloutBuffer {
  int num_envs = 0, horizon = 0, obs_dim = 0, act_dim = 0;
  std::vector<float> obs;
  std::vector<float> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<uint8_t> dones;
  std::vector<double> bootstrap_values;  // per env
  std::vector<double> advantages;
  std::vector<double> returns;

  // Episode bookkeeping for logging.
  double mean_episode_return = 0.0;
  double mean_episode_length = 0.0;
  int episodes_finished = 0;

  int size() const { return num_envs * horizon; }
  void resize(int envs, int hor, int od, int ad);
  // Fill advantages/returns (GAE) and normalize advantages to zero mean, unit std.
  void finalize(double gamma, double lambda);
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
  double surrogate = 0.0;
  bool aborted = false;  // non-finite loss, parameters rolled back
};

class PpoTrainer {
 public:
  PpoTrainer(std::vector<std::unique_ptr<Env>> envs, const PpoConfig& cfg,
             uint64_t init_seed);

  // horizon steps from every env; envs persist across rollouts.
  void collect_rollout();
  // Clipped-surrogate update over the last rollout.
  PpoStats update();

  // One collect + update; returns stats.
  PpoStats iterate();

  nn::GaussianPolicy<float>& policy() { return policy_; }
  nn::Mlp<float>& value_net() { return value_; }
  const RolloutBuffer& buffer() const { return buffer_; }
  std::vector<std::unique_ptr<Env>>& envs() { return envs_; }
  int64_t env_steps() const { return env_steps_; }
  void set_env_steps(int64_t steps) { env_steps_ = steps; }  // checkpoint resume
  const PpoConfig& config() const { return cfg_; }

  // Episode tracking (per env running sums).
  std::vector<double> episode_return_;
  std::vector<int> episode_length_;

 private:
  PpoConfig cfg_;
  std::vector<std::unique_ptr<Env>> envs_;
  nn::GaussianPolicy<float> policy_;
  nn::Mlp<float> value_;
  nn::Adam<float> opt_policy_;
  nn::Adam<float> opt_value_;
  nn::Mlp<float>::Grads policy_grads_;
  std::vector<float> log_std_grads_;
  nn::Mlp<float>::Grads value_grads_;
  RolloutBuffer buffer_;
  Rng shuffle_rng_;
  int64_t env_steps_ = 0;
};

}  // namespace keyloco::rl
