#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "keyloco/envs/tracker_env.hpp"
#include "keyloco/nn/adam.hpp"
#include "keyloco/nn/conv.hpp"
#include "keyloco/nn/mlp.hpp"
#include "keyloco/rng.hpp"

namespace keyloco::distill {

struct DistillConfig {
  int iterations = 20;
  int steps_per_iteration = 2048;  // rollout transitions, summed over envs
  int epochs = 4;                  // regression passes per iteration
  int batch_size = 256;
  double lr = 1e-3;
  size_t capacity = 200'000;  // aggregate ring buffer, FIFO once full
};

// Aggregated (student_obs, teacher_label) pairs. Append until capacity, then
// FIFO eviction. actor_id records which policy generated the visited state.
struct Dataset {
  static constexpr uint8_t kActorTeacher = 0;
  static constexpr uint8_t kActorStudent = 1;

  Dataset(int obs_dim, int act_dim, size_t capacity);

  void push(const float* obs, const float* label, uint8_t actor);
  size_t size() const { return count_; }
  size_t capacity() const { return capacity_; }
  const float* obs(size_t i) const { return obs_.data() + i * obs_dim_; }
  const float* label(size_t i) const { return labels_.data() + i * act_dim_; }
  uint8_t actor(size_t i) const { return actor_[i]; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

 private:
  int obs_dim_, act_dim_;
  size_t capacity_, head_ = 0, count_ = 0;
  std::vector<float> obs_, labels_;
  std::vector<uint8_t> actor_;
};

// Regressable deterministic policy. act() must be safe to call concurrently.
class Student {
 public:
  virtual ~Student() = default;
  virtual int obs_dim() const = 0;
  virtual int act_dim() const = 0;
  virtual void act(const float* obs, float* out) const = 0;
  // One minibatch: accumulate MSE gradients over `indices`, one Adam step.
  // Returns the batch MSE (pre-step).
  virtual double train(const Dataset& data, const std::vector<int>& indices) = 0;
  virtual double mse(const Dataset& data, const std::vector<int>& indices) const = 0;
};

// Plain MLP student (stage-2 keypoint tracker, blind/flat ablations).
class MlpStudent : public Student {
 public:
  MlpStudent(std::vector<int> dims, double lr, Rng init_rng);
  explicit MlpStudent(nn::Mlp<float> net, double lr);

  int obs_dim() const override { return net_.in_dim(); }
  int act_dim() const override { return net_.out_dim(); }
  void act(const float* obs, float* out) const override;
  double train(const Dataset& data, const std::vector<int>& indices) override;
  double mse(const Dataset& data, const std::vector<int>& indices) const override;

  nn::Mlp<float>& net() { return net_; }

 private:
  nn::Mlp<float> net_;
  nn::Mlp<float>::Grads grads_;
  nn::Adam<float> opt_;
};

// Depth student: conv encoder over the trailing image block, MLP head over
// [non-image obs, encoder features].
class VisionStudent : public Student {
 public:
  // obs = [state_dim floats, kWidth*kHeight image]; head hidden layers given.
  VisionStudent(int state_dim, int act_dim, int hidden, double lr, Rng init_rng);

  int obs_dim() const override;
  int act_dim() const override { return head_.out_dim(); }
  void act(const float* obs, float* out) const override;
  double train(const Dataset& data, const std::vector<int>& indices) override;
  double mse(const Dataset& data, const std::vector<int>& indices) const override;

  nn::DepthEncoder<float>& encoder() { return enc_; }
  nn::Mlp<float>& head() { return head_; }
  int state_dim() const { return state_dim_; }

 private:
  int state_dim_;
  nn::DepthEncoder<float> enc_;
  nn::Mlp<float> head_;
  nn::DepthEncoder<float>::Grads enc_grads_;
  nn::Mlp<float>::Grads head_grads_;
  nn::Adam<float> opt_;
};

// Teacher label: deterministic mean action for the state's teacher obs.
std::vector<float> label(const nn::Mlp<float>& teacher_mean,
                         const std::vector<float>& teacher_obs);

struct DistillIterLog {
  int iteration = 0;
  size_t dataset_size = 0;
  double train_mse = 0.0;    // mean batch MSE during this iteration's regression
  double heldout_mse = 0.0;  // MSE on this iteration's fresh rollout, pre-regression
};

struct DistillResult {
  std::vector<DistillIterLog> log;
  double initial_heldout = 0.0;  // heldout at iteration 0
  double final_heldout = 0.0;    // fresh rollout after the last regression
};

// DAgger with beta = 0: every rollout acts with the student; the frozen
// teacher labels every visited state. Throws on action-dim mismatch.
DistillResult distill(Student& student, const nn::Mlp<float>& teacher_mean,
                      std::vector<std::unique_ptr<envs::DistillEnv>>& envs,
                      const DistillConfig& cfg, Rng& rng);

}  // namespace keyloco::distill
