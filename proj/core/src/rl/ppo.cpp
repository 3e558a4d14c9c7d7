#include "keyloco/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "keyloco/math.hpp"
#include "keyloco/parallel.hpp"
#include "keyloco/rl/gae.hpp"

namespace keyloco::rl {

void RolloutBuffer::resize(int envs, int hor, int od, int ad) {
  num_envs = envs;
  horizon = hor;
  obs_dim = od;
  act_dim = ad;
  size_t n = static_cast<size_t>(envs) * hor;
  obs.assign(n * od, 0.0f);
  actions.assign(n * ad, 0.0f);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  log_probs.assign(n, 0.0);
  dones.assign(n, 0);
  bootstrap_values.assign(envs, 0.0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

void RolloutBuffer::finalize(double gamma, double lambda) {
  for (int e = 0; e < num_envs; ++e) {
    size_t base = static_cast<size_t>(e) * horizon;
    std::vector<double> r(rewards.begin() + base, rewards.begin() + base + horizon);
    std::vector<double> v(values.begin() + base, values.begin() + base + horizon);
    std::vector<uint8_t> d(dones.begin() + base, dones.begin() + base + horizon);
    GaeResult g = compute_gae(r, v, d, bootstrap_values[e], gamma, lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), advantages.begin() + base);
    std::copy(g.returns.begin(), g.returns.end(), returns.begin() + base);
  }
  // Normalize advantages: zero mean, unit std over the whole batch.
  size_t n = advantages.size();
  double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += sq(a - mean);
  double std = std::sqrt(var / n);
  for (double& a : advantages) a = (a - mean) / (std + 1e-8);
}

PpoTrainer::PpoTrainer(std::vector<std::unique_ptr<Env>> envs, const PpoConfig& cfg,
                       uint64_t init_seed)
    : cfg_(cfg), envs_(std::move(envs)),
      policy_(envs_.at(0)->obs_dim(), envs_.at(0)->act_dim(), cfg.hidden),
      value_(std::vector<int>{envs_.at(0)->obs_dim(), cfg.hidden, cfg.hidden, 1}),
      shuffle_rng_(Rng::derive(init_seed, 0xbeef)) {
  Rng init_rng = Rng::derive(init_seed, 0xcafe);
  policy_.mean.init(init_rng, 0.01);
  std::fill(policy_.log_std.begin(), policy_.log_std.end(),
            static_cast<float>(std::log(cfg.init_std)));
  value_.init(init_rng, 1.0);
  policy_grads_ = policy_.mean.make_grads();
  log_std_grads_.assign(policy_.log_std.size(), 0.0f);
  value_grads_ = value_.make_grads();
  auto pv = policy_.params(&policy_grads_, &log_std_grads_);
  opt_policy_ = nn::Adam<float>(cfg.lr);
  opt_policy_.attach(pv);
  auto vv = value_.params(&value_grads_, "value");
  opt_value_ = nn::Adam<float>(cfg.lr);
  opt_value_.attach(vv);
  for (auto& e : envs_) e->reset();
  episode_return_.assign(envs_.size(), 0.0);
  episode_length_.assign(envs_.size(), 0);
  buffer_.resize(static_cast<int>(envs_.size()), cfg_.horizon,
                 envs_.at(0)->obs_dim(), envs_.at(0)->act_dim());
}

void PpoTrainer::collect_rollout() {
  int n_envs = static_cast<int>(envs_.size());
  int hor = cfg_.horizon;
  int od = buffer_.obs_dim, ad = buffer_.act_dim;
  std::vector<double> finished_returns_sum(n_envs, 0.0);
  std::vector<double> finished_length_sum(n_envs, 0.0);
  std::vector<int> finished_count(n_envs, 0);

  parallel_for(n_envs, [&](int e) {
    Env& env = *envs_[e];
    for (int t = 0; t < hor; ++t) {
      size_t idx = static_cast<size_t>(e) * hor + t;
      const ObsVec& o = env.obs();
      std::copy(o.begin(), o.end(), buffer_.obs.begin() + idx * od);
      std::vector<float> mu = policy_.mean.forward(o);
      std::vector<float> a = policy_.sample(mu, env.rng());
      env.clip_action(a);
      buffer_.log_probs[idx] = policy_.log_prob(mu, a);
      std::copy(a.begin(), a.end(), buffer_.actions.begin() + idx * ad);
      buffer_.values[idx] = value_.forward(o)[0];
      StepResult r = env.step(a);
      buffer_.rewards[idx] = r.reward;
      buffer_.dones[idx] = r.done ? 1 : 0;
      episode_return_[e] += r.reward;
      episode_length_[e] += 1;
      if (r.done) {
        finished_returns_sum[e] += episode_return_[e];
        finished_length_sum[e] += episode_length_[e];
        finished_count[e] += 1;
        episode_return_[e] = 0.0;
        episode_length_[e] = 0;
        env.reset();
      }
    }
    buffer_.bootstrap_values[e] = value_.forward(env.obs())[0];
  });

  int total_eps = std::accumulate(finished_count.begin(), finished_count.end(), 0);
  double ret_sum = std::accumulate(finished_returns_sum.begin(), finished_returns_sum.end(), 0.0);
  double len_sum = std::accumulate(finished_length_sum.begin(), finished_length_sum.end(), 0.0);
  buffer_.episodes_finished = total_eps;
  buffer_.mean_episode_return = total_eps > 0 ? ret_sum / total_eps : 0.0;
  buffer_.mean_episode_length = total_eps > 0 ? len_sum / total_eps : 0.0;
  env_steps_ += static_cast<int64_t>(n_envs) * hor;
}

namespace {

// Per-worker gradient scratch for deterministic block-partitioned reduction.
struct WorkerAccum {
  nn::Mlp<float>::Grads pg;
  std::vector<float> lsg;
  nn::Mlp<float>::Grads vg;
  double policy_loss = 0.0, value_loss = 0.0, surrogate = 0.0;
  int clipped = 0;
  bool finite = true;
};

void clip_global_norm(std::vector<nn::ParamView<float>>& params, double max_norm) {
  double norm2 = 0.0;
  for (auto& p : params)
    for (size_t i = 0; i < p.size(); ++i) norm2 += sq(static_cast<double>(p.grad[i]));
  double norm = std::sqrt(norm2);
  if (norm > max_norm && norm > 1e-12) {
    float scale = static_cast<float>(max_norm / norm);
    for (auto& p : params)
      for (size_t i = 0; i < p.size(); ++i) p.grad[i] *= scale;
  }
}

}  // namespace

PpoStats PpoTrainer::update() {
  buffer_.finalize(cfg_.gamma, cfg_.gae_lambda);
  int n = buffer_.size();
  int od = buffer_.obs_dim, ad = buffer_.act_dim;

  // Snapshot for rollback on non-finite loss.
  auto policy_snapshot = policy_;
  auto value_snapshot = value_;

  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  PpoStats stats;
  stats.mean_return = buffer_.mean_episode_return;
  stats.mean_episode_length = buffer_.mean_episode_length;
  stats.entropy = policy_.entropy();
  int64_t samples_seen = 0, clipped_seen = 0;
  double ploss_sum = 0.0, vloss_sum = 0.0, surr_sum = 0.0;

  int workers = worker_count();
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(indices.begin(), indices.end(), shuffle_rng_.engine());
    int mb_size = n / cfg_.minibatches;
    for (int mb = 0; mb < cfg_.minibatches; ++mb) {
      const int* mb_idx = indices.data() + static_cast<size_t>(mb) * mb_size;

      std::vector<WorkerAccum> acc(workers);
      for (auto& a : acc) {
        a.pg = policy_.mean.make_grads();
        a.lsg.assign(policy_.log_std.size(), 0.0f);
        a.vg = value_.make_grads();
      }

      parallel_for(workers, [&](int w) {
        WorkerAccum& wa = acc[w];
        int lo = static_cast<int>(static_cast<int64_t>(mb_size) * w / workers);
        int hi = static_cast<int>(static_cast<int64_t>(mb_size) * (w + 1) / workers);
        nn::Mlp<float>::Cache pcache, vcache;
        std::vector<float> obs(od), action(ad);
        std::vector<double> dmu, dls;
        for (int s = lo; s < hi; ++s) {
          int idx = mb_idx[s];
          std::copy(buffer_.obs.begin() + static_cast<size_t>(idx) * od,
                    buffer_.obs.begin() + static_cast<size_t>(idx) * od + od,
                    obs.begin());
          std::copy(buffer_.actions.begin() + static_cast<size_t>(idx) * ad,
                    buffer_.actions.begin() + static_cast<size_t>(idx) * ad + ad,
                    action.begin());
          double adv = buffer_.advantages[idx];
          double ret = buffer_.returns[idx];
          double logp_old = buffer_.log_probs[idx];

          const auto& mu = policy_.mean.forward(obs.data(), pcache);
          double logp = policy_.log_prob(mu, action);
          double ratio = std::exp(logp - logp_old);
          double unclipped = ratio * adv;
          double clipped_ratio = clamp(ratio, 1.0 - cfg_.clip_eps, 1.0 + cfg_.clip_eps);
          double clipped = clipped_ratio * adv;
          double surr = std::min(unclipped, clipped);
          wa.surrogate += surr;
          wa.policy_loss += -surr;
          if (std::abs(ratio - 1.0) > cfg_.clip_eps) ++wa.clipped;
          if (!std::isfinite(surr)) wa.finite = false;

          // Backprop only through the active (unclipped) branch.
          if (unclipped <= clipped + 1e-12) {
            policy_.log_prob_grads(mu, action, dmu, dls);
            double coef = -ratio * adv;  // d(-surr)/dlogp
            std::vector<float> dmu_f(ad);
            for (int j = 0; j < ad; ++j) {
              dmu_f[j] = static_cast<float>(coef * dmu[j]);
              wa.lsg[j] += static_cast<float>(coef * dls[j]);
            }
            policy_.mean.backward(pcache, dmu_f, wa.pg);
          }
          // Entropy bonus gradient (log-std only).
          for (int j = 0; j < ad; ++j)
            wa.lsg[j] += static_cast<float>(-cfg_.entropy_coef);

          const auto& v = value_.forward(obs.data(), vcache);
          double verr = v[0] - ret;
          wa.value_loss += 0.5 * sq(verr);
          if (!std::isfinite(verr)) wa.finite = false;
          value_.backward(vcache, {static_cast<float>(cfg_.value_coef * verr)}, wa.vg);
        }
      });

      bool finite = true;
      policy_grads_.zero();
      std::fill(log_std_grads_.begin(), log_std_grads_.end(), 0.0f);
      value_grads_.zero();
      float inv = 1.0f / static_cast<float>(mb_size);
      for (const auto& wa : acc) {
        finite = finite && wa.finite;
        for (size_t l = 0; l < policy_grads_.gw.size(); ++l) {
          for (size_t i = 0; i < policy_grads_.gw[l].size(); ++i)
            policy_grads_.gw[l][i] += wa.pg.gw[l][i] * inv;
          for (size_t i = 0; i < policy_grads_.gb[l].size(); ++i)
            policy_grads_.gb[l][i] += wa.pg.gb[l][i] * inv;
        }
        for (size_t j = 0; j < log_std_grads_.size(); ++j)
          log_std_grads_[j] += wa.lsg[j] * inv;
        for (size_t l = 0; l < value_grads_.gw.size(); ++l) {
          for (size_t i = 0; i < value_grads_.gw[l].size(); ++i)
            value_grads_.gw[l][i] += wa.vg.gw[l][i] * inv;
          for (size_t i = 0; i < value_grads_.gb[l].size(); ++i)
            value_grads_.gb[l][i] += wa.vg.gb[l][i] * inv;
        }
        ploss_sum += wa.policy_loss;
        vloss_sum += wa.value_loss;
        surr_sum += wa.surrogate;
        clipped_seen += wa.clipped;
      }
      samples_seen += mb_size;

      if (!finite) {
        policy_ = policy_snapshot;
        value_ = value_snapshot;
        stats.aborted = true;
        return stats;
      }

      auto pv = policy_.params(&policy_grads_, &log_std_grads_);
      clip_global_norm(pv, cfg_.max_grad_norm);
      opt_policy_.step(pv);
      auto vv = value_.params(&value_grads_, "value");
      clip_global_norm(vv, cfg_.max_grad_norm);
      opt_value_.step(vv);
    }
  }

  stats.policy_loss = ploss_sum / samples_seen;
  stats.value_loss = vloss_sum / samples_seen;
  stats.surrogate = surr_sum / samples_seen;
  stats.clip_fraction = static_cast<double>(clipped_seen) / samples_seen;
  stats.entropy = policy_.entropy();
  return stats;
}

PpoStats PpoTrainer::iterate() {
  collect_rollout();
  return update();
}

}  // namespace keyloco::rl
