#include <doctest.h>

#include <cmath>
#include <memory>

#include "keyloco/math.hpp"
#include "keyloco/rl/gae.hpp"
#include "keyloco/rl/ppo.hpp"

using namespace keyloco;
using namespace keyloco::rl;

namespace {

// Point-mass target seeker: obs = position error, reward = -|error|.
// Deterministic transitions so trainer runs are reproducible by seed.
class SeekEnv : public Env {
 public:
  explicit SeekEnv(uint64_t stream) : rng_(Rng::derive(404, stream)) { reset(); }
  int obs_dim() const override { return 1; }
  int act_dim() const override { return 1; }
  void reset() override {
    ++episode_;
    pos_ = (episode_ % 2 == 0) ? 1.0 : -1.0;
    t_ = 0;
    refresh();
  }
  const ObsVec& obs() const override { return obs_vec_; }
  StepResult step(const std::vector<float>& a) override {
    pos_ += 0.2 * clamp(static_cast<double>(a[0]), -1.0, 1.0);
    ++t_;
    StepResult r;
    r.reward = static_cast<float>(-std::abs(pos_));
    r.done = t_ >= 20;
    refresh();
    if (r.done) reset();
    return r;
  }
  void clip_action(std::vector<float>& a) const override {
    for (auto& v : a) v = clamp(v, -1.0f, 1.0f);
  }
  Rng& rng() override { return rng_; }

 private:
  void refresh() { obs_vec_ = {static_cast<float>(pos_)}; }
  Rng rng_;
  ObsVec obs_vec_;
  double pos_ = 1.0;
  int t_ = 0;
  int episode_ = 0;
};

PpoConfig tiny_cfg() {
  PpoConfig cfg;
  cfg.num_envs = 8;
  cfg.horizon = 32;
  cfg.hidden = 16;
  cfg.epochs = 3;
  cfg.minibatches = 2;
  cfg.lr = 3e-3;
  cfg.total_env_steps = 40'000;
  return cfg;
}

std::vector<std::unique_ptr<Env>> make_envs(int n) {
  std::vector<std::unique_ptr<Env>> envs;
  for (int i = 0; i < n; ++i) envs.push_back(std::make_unique<SeekEnv>(i));
  return envs;
}

}  // namespace

// [PRIMARY] criterion 4: hand-computed GAE fixture.
TEST_CASE("GAE matches a hand-computed fixture") {
  // gamma=0.9, lambda=0.8; r = {1, 0, 2}, V = {0.5, 1.0, 0.25},
  // done = {0,0,1}, bootstrap 9 (must be ignored after the terminal step).
  std::vector<double> r{1, 0, 2}, v{0.5, 1.0, 0.25};
  std::vector<uint8_t> d{0, 0, 1};
  auto out = compute_gae(r, v, d, 9.0, 0.9, 0.8);

  double d2 = 2.0 - 0.25;                  // terminal: no bootstrap
  double a2 = d2;                          // 1.75
  double d1 = 0.0 + 0.9 * 0.25 - 1.0;      // -0.775
  double a1 = d1 + 0.9 * 0.8 * a2;         // 0.485
  double d0 = 1.0 + 0.9 * 1.0 - 0.5;       // 1.4
  double a0 = d0 + 0.9 * 0.8 * a1;         // 1.7492
  CHECK(out.advantages[2] == doctest::Approx(a2).epsilon(1e-12));
  CHECK(out.advantages[1] == doctest::Approx(a1).epsilon(1e-12));
  CHECK(out.advantages[0] == doctest::Approx(a0).epsilon(1e-12));
  for (int t = 0; t < 3; ++t)
    CHECK(out.returns[t] == doctest::Approx(out.advantages[t] + v[t]).epsilon(1e-12));
}

TEST_CASE("GAE bootstrap feeds the tail when the rollout is truncated") {
  std::vector<double> r{0.0}, v{1.0};
  std::vector<uint8_t> d{0};
  auto out = compute_gae(r, v, d, 2.0, 0.5, 1.0);
  CHECK(out.advantages[0] == doctest::Approx(0.0 + 0.5 * 2.0 - 1.0).epsilon(1e-12));
}

// [PRIMARY] criterion 4: gamma=0 collapses advantages to the TD residual
// r_t - V_t (plus nothing from the future).
TEST_CASE("GAE with gamma=0 collapses to r - V") {
  Rng rng(83);
  std::vector<double> r(64), v(64);
  std::vector<uint8_t> d(64, 0);
  for (int t = 0; t < 64; ++t) {
    r[t] = rng.normal();
    v[t] = rng.normal();
    d[t] = rng.uniform(0, 1) < 0.2 ? 1 : 0;
  }
  auto out = compute_gae(r, v, d, rng.normal(), 0.0, 0.95);
  for (int t = 0; t < 64; ++t)
    CHECK(out.advantages[t] == doctest::Approx(r[t] - v[t]).epsilon(1e-12));
}

TEST_CASE("rollout buffer stores clipped actions with matching log-probs") {
  auto cfg = tiny_cfg();
  PpoTrainer trainer(make_envs(cfg.num_envs), cfg, 1234);
  trainer.collect_rollout();
  const auto& buf = trainer.buffer();
  REQUIRE(buf.size() == cfg.num_envs * cfg.horizon);
  nn::Mlp<float>::Cache cache;
  for (int i = 0; i < buf.size(); i += 17) {
    // Every stored action respects the env clip.
    CHECK(buf.actions[i] >= -1.0f);
    CHECK(buf.actions[i] <= 1.0f);
    // Stored log-prob was evaluated at the stored (clipped) action.
    const auto& mu = trainer.policy().mean.forward(&buf.obs[i], cache);
    double lp = trainer.policy().log_prob(
        {mu.begin(), mu.end()}, {buf.actions.begin() + i, buf.actions.begin() + i + 1});
    CHECK(buf.log_probs[i] == doctest::Approx(lp).epsilon(1e-6));
  }
}

TEST_CASE("buffer finalize normalizes advantages") {
  auto cfg = tiny_cfg();
  PpoTrainer trainer(make_envs(cfg.num_envs), cfg, 99);
  trainer.collect_rollout();
  auto buf = trainer.buffer();  // copy; finalize runs at the start of update()
  buf.finalize(cfg.gamma, cfg.gae_lambda);
  double mean = 0, var = 0;
  for (double a : buf.advantages) mean += a;
  mean /= buf.advantages.size();
  for (double a : buf.advantages) var += (a - mean) * (a - mean);
  var /= buf.advantages.size();
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("PPO improves the seek task") {
  auto cfg = tiny_cfg();
  PpoTrainer trainer(make_envs(cfg.num_envs), cfg, 2024);
  PpoStats first = trainer.iterate();
  PpoStats last{};
  for (int i = 0; i < 60; ++i) last = trainer.iterate();
  // Optimal is ~-2.5 total (burn off the initial error), random is much worse.
  CHECK(last.mean_return > first.mean_return + 2.0);
  CHECK(!last.aborted);
  CHECK(last.clip_fraction >= 0.0);
  CHECK(last.clip_fraction <= 1.0);
}

TEST_CASE("identical seeds give identical training trajectories") {
  auto cfg = tiny_cfg();
  PpoTrainer a(make_envs(cfg.num_envs), cfg, 777);
  PpoTrainer b(make_envs(cfg.num_envs), cfg, 777);
  for (int i = 0; i < 3; ++i) {
    PpoStats sa = a.iterate();
    PpoStats sb = b.iterate();
    CHECK(sa.mean_return == sb.mean_return);
    CHECK(sa.policy_loss == sb.policy_loss);
    CHECK(sa.value_loss == sb.value_loss);
  }
  // Bitwise identical parameters after training.
  for (size_t l = 0; l < a.policy().mean.num_layers(); ++l) {
    const auto& wa = a.policy().mean.weights(l);
    const auto& wb = b.policy().mean.weights(l);
    for (size_t i = 0; i < wa.size(); ++i) CHECK(wa[i] == wb[i]);
  }
  for (size_t j = 0; j < a.policy().log_std.size(); ++j)
    CHECK(a.policy().log_std[j] == b.policy().log_std[j]);
}

TEST_CASE("different seeds diverge") {
  auto cfg = tiny_cfg();
  PpoTrainer a(make_envs(cfg.num_envs), cfg, 1);
  PpoTrainer b(make_envs(cfg.num_envs), cfg, 2);
  PpoStats sa = a.iterate();
  PpoStats sb = b.iterate();
  CHECK(sa.mean_return != sb.mean_return);
}

TEST_CASE("env_steps counts collected transitions") {
  auto cfg = tiny_cfg();
  PpoTrainer trainer(make_envs(cfg.num_envs), cfg, 5);
  CHECK(trainer.env_steps() == 0);
  trainer.iterate();
  CHECK(trainer.env_steps() == cfg.num_envs * cfg.horizon);
  trainer.set_env_steps(123456);
  CHECK(trainer.env_steps() == 123456);
}
