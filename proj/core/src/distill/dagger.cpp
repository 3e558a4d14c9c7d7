#include "keyloco/distill/dagger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "keyloco/parallel.hpp"

namespace keyloco::distill {

Dataset::Dataset(int obs_dim, int act_dim, size_t capacity)
    : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("Dataset: zero capacity");
  obs_.resize(capacity_ * obs_dim_);
  labels_.resize(capacity_ * act_dim_);
  actor_.resize(capacity_);
}

void Dataset::push(const float* obs, const float* label, uint8_t actor) {
  std::copy(obs, obs + obs_dim_, obs_.begin() + head_ * obs_dim_);
  std::copy(label, label + act_dim_, labels_.begin() + head_ * act_dim_);
  actor_[head_] = actor;
  head_ = (head_ + 1) % capacity_;
  count_ = std::min(count_ + 1, capacity_);
}

MlpStudent::MlpStudent(std::vector<int> dims, double lr, Rng init_rng)
    : net_(std::move(dims)), opt_(lr) {
  net_.init(init_rng, 0.01);
  grads_ = net_.make_grads();
  auto pv = net_.params(&grads_, "student");
  opt_.attach(pv);
}

MlpStudent::MlpStudent(nn::Mlp<float> net, double lr)
    : net_(std::move(net)), opt_(lr) {
  grads_ = net_.make_grads();
  auto pv = net_.params(&grads_, "student");
  opt_.attach(pv);
}

void MlpStudent::act(const float* obs, float* out) const {
  nn::Mlp<float>::Cache cache;
  const auto& y = net_.forward(obs, cache);
  std::copy(y.begin(), y.end(), out);
}

namespace {

// Deterministic parallel gradient/MSE accumulation over a sample range.
template <typename PerSample>
double parallel_mse(int n, const PerSample& per_sample) {
  int workers = worker_count();
  std::vector<double> sums(workers, 0.0);
  parallel_for(workers, [&](int w) {
    int lo = static_cast<int>(static_cast<int64_t>(n) * w / workers);
    int hi = static_cast<int>(static_cast<int64_t>(n) * (w + 1) / workers);
    for (int s = lo; s < hi; ++s) sums[w] += per_sample(s, w);
  });
  double total = 0.0;
  for (double s : sums) total += s;
  return n > 0 ? total / n : 0.0;
}

}  // namespace

double MlpStudent::mse(const Dataset& data, const std::vector<int>& indices) const {
  const int ad = act_dim();
  return parallel_mse(static_cast<int>(indices.size()), [&](int s, int) {
    nn::Mlp<float>::Cache cache;
    const float* o = data.obs(indices[s]);
    const float* l = data.label(indices[s]);
    const auto& y = net_.forward(o, cache);
    double e = 0.0;
    for (int j = 0; j < ad; ++j) e += sq(static_cast<double>(y[j]) - l[j]);
    return e / ad;
  });
}

double MlpStudent::train(const Dataset& data, const std::vector<int>& indices) {
  const int ad = act_dim();
  const int n = static_cast<int>(indices.size());
  int workers = worker_count();
  std::vector<nn::Mlp<float>::Grads> wg(workers);
  for (auto& g : wg) g = net_.make_grads();

  double batch_mse = parallel_mse(n, [&](int s, int w) {
    nn::Mlp<float>::Cache cache;
    const float* o = data.obs(indices[s]);
    const float* l = data.label(indices[s]);
    const auto& y = net_.forward(o, cache);
    std::vector<float> dy(ad);
    double e = 0.0;
    for (int j = 0; j < ad; ++j) {
      double diff = static_cast<double>(y[j]) - l[j];
      e += sq(diff);
      dy[j] = static_cast<float>(2.0 * diff / (static_cast<double>(n) * ad));
    }
    net_.backward(cache, dy, wg[w]);
    return e / ad;
  });

  grads_.zero();
  for (const auto& g : wg) {
    for (size_t l = 0; l < grads_.gw.size(); ++l) {
      for (size_t i = 0; i < grads_.gw[l].size(); ++i) grads_.gw[l][i] += g.gw[l][i];
      for (size_t i = 0; i < grads_.gb[l].size(); ++i) grads_.gb[l][i] += g.gb[l][i];
    }
  }
  auto pv = net_.params(&grads_, "student");
  opt_.step(pv);
  return batch_mse;
}

VisionStudent::VisionStudent(int state_dim, int act_dim, int hidden, double lr,
                             Rng init_rng)
    : state_dim_(state_dim),
      head_(std::vector<int>{state_dim + nn::DepthEncoder<float>::kFeatures, hidden,
                             hidden, act_dim}),
      opt_(lr) {
  enc_.init(init_rng);
  head_.init(init_rng, 0.01);
  enc_grads_ = enc_.make_grads();
  head_grads_ = head_.make_grads();
  auto pv = enc_.params(&enc_grads_);
  auto hv = head_.params(&head_grads_, "head");
  pv.insert(pv.end(), hv.begin(), hv.end());
  opt_.attach(pv);
}

int VisionStudent::obs_dim() const {
  return state_dim_ + nn::DepthEncoder<float>::kWidth * nn::DepthEncoder<float>::kHeight;
}

void VisionStudent::act(const float* obs, float* out) const {
  nn::DepthEncoder<float>::Cache ec;
  nn::Mlp<float>::Cache hc;
  const auto& feat = enc_.forward(obs + state_dim_, ec);
  std::vector<float> hin(head_.in_dim());
  std::copy(obs, obs + state_dim_, hin.begin());
  std::copy(feat.begin(), feat.end(), hin.begin() + state_dim_);
  const auto& y = head_.forward(hin.data(), hc);
  std::copy(y.begin(), y.end(), out);
}

double VisionStudent::mse(const Dataset& data, const std::vector<int>& indices) const {
  const int ad = act_dim();
  return parallel_mse(static_cast<int>(indices.size()), [&](int s, int) {
    std::vector<float> y(ad);
    act(data.obs(indices[s]), y.data());
    const float* l = data.label(indices[s]);
    double e = 0.0;
    for (int j = 0; j < ad; ++j) e += sq(static_cast<double>(y[j]) - l[j]);
    return e / ad;
  });
}

double VisionStudent::train(const Dataset& data, const std::vector<int>& indices) {
  const int ad = act_dim();
  const int n = static_cast<int>(indices.size());
  int workers = worker_count();
  std::vector<nn::DepthEncoder<float>::Grads> weg(workers);
  std::vector<nn::Mlp<float>::Grads> whg(workers);
  for (auto& g : weg) g = enc_.make_grads();
  for (auto& g : whg) g = head_.make_grads();

  double batch_mse = parallel_mse(n, [&](int s, int w) {
    nn::DepthEncoder<float>::Cache ec;
    nn::Mlp<float>::Cache hc;
    const float* o = data.obs(indices[s]);
    const float* l = data.label(indices[s]);
    const auto& feat = enc_.forward(o + state_dim_, ec);
    std::vector<float> hin(head_.in_dim());
    std::copy(o, o + state_dim_, hin.begin());
    std::copy(feat.begin(), feat.end(), hin.begin() + state_dim_);
    const auto& y = head_.forward(hin.data(), hc);

    std::vector<float> dy(ad);
    double e = 0.0;
    for (int j = 0; j < ad; ++j) {
      double diff = static_cast<double>(y[j]) - l[j];
      e += sq(diff);
      dy[j] = static_cast<float>(2.0 * diff / (static_cast<double>(n) * ad));
    }
    std::vector<float> dhin;
    head_.backward(hc, dy, whg[w], &dhin);
    std::vector<float> dfeat(dhin.begin() + state_dim_, dhin.end());
    enc_.backward(ec, dfeat, weg[w]);
    return e / ad;
  });

  enc_grads_.zero();
  head_grads_.zero();
  for (const auto& g : weg) {
    for (size_t l = 0; l < enc_grads_.gw.size(); ++l) {
      for (size_t i = 0; i < enc_grads_.gw[l].size(); ++i)
        enc_grads_.gw[l][i] += g.gw[l][i];
      for (size_t i = 0; i < enc_grads_.gb[l].size(); ++i)
        enc_grads_.gb[l][i] += g.gb[l][i];
    }
    for (size_t i = 0; i < enc_grads_.gfw.size(); ++i) enc_grads_.gfw[i] += g.gfw[i];
    for (size_t i = 0; i < enc_grads_.gfb.size(); ++i) enc_grads_.gfb[i] += g.gfb[i];
  }
  for (const auto& g : whg) {
    for (size_t l = 0; l < head_grads_.gw.size(); ++l) {
      for (size_t i = 0; i < head_grads_.gw[l].size(); ++i)
        head_grads_.gw[l][i] += g.gw[l][i];
      for (size_t i = 0; i < head_grads_.gb[l].size(); ++i)
        head_grads_.gb[l][i] += g.gb[l][i];
    }
  }
  auto pv = enc_.params(&enc_grads_);
  auto hv = head_.params(&head_grads_, "head");
  pv.insert(pv.end(), hv.begin(), hv.end());
  opt_.step(pv);
  return batch_mse;
}

std::vector<float> label(const nn::Mlp<float>& teacher_mean,
                         const std::vector<float>& teacher_obs) {
  return teacher_mean.forward(teacher_obs);
}

namespace {

struct Transition {
  std::vector<float> obs, label;
};

// Student rollout with teacher labels at every visited state; per-env
// transition lists merged in env order so the dataset is deterministic.
std::vector<std::vector<Transition>> rollout(
    Student& student, const nn::Mlp<float>& teacher_mean,
    std::vector<std::unique_ptr<envs::DistillEnv>>& envs, int steps_per_env) {
  std::vector<std::vector<Transition>> per_env(envs.size());
  parallel_for(static_cast<int>(envs.size()), [&](int e) {
    envs::DistillEnv& env = *envs[e];
    nn::Mlp<float>::Cache tcache;
    auto& out = per_env[e];
    out.reserve(steps_per_env);
    for (int t = 0; t < steps_per_env; ++t) {
      Transition tr;
      tr.obs = env.obs();
      const auto& to = env.teacher_obs();
      const auto& lab = teacher_mean.forward(to.data(), tcache);
      tr.label.assign(lab.begin(), lab.end());

      std::vector<float> a(env.act_dim());
      student.act(tr.obs.data(), a.data());
      env.clip_action(a);
      out.push_back(std::move(tr));
      if (env.step(a).done) env.reset();
    }
  });
  return per_env;
}

double fresh_mse(Student& student, const std::vector<std::vector<Transition>>& data) {
  double sum = 0.0;
  int64_t count = 0;
  const int ad = student.act_dim();
  for (const auto& env_data : data) {
    for (const auto& tr : env_data) {
      std::vector<float> y(ad);
      student.act(tr.obs.data(), y.data());
      for (int j = 0; j < ad; ++j) sum += sq(static_cast<double>(y[j]) - tr.label[j]);
      count += ad;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace

DistillResult distill(Student& student, const nn::Mlp<float>& teacher_mean,
                      std::vector<std::unique_ptr<envs::DistillEnv>>& envs,
                      const DistillConfig& cfg, Rng& rng) {
  if (envs.empty()) throw std::invalid_argument("distill: no envs");
  if (teacher_mean.out_dim() != student.act_dim())
    throw std::invalid_argument("distill: teacher/student action dim mismatch");
  if (cfg.capacity <= static_cast<size_t>(cfg.batch_size))
    throw std::invalid_argument("distill: capacity must exceed batch size");

  Dataset data(student.obs_dim(), student.act_dim(), cfg.capacity);
  int steps_per_env =
      std::max(1, cfg.steps_per_iteration / static_cast<int>(envs.size()));

  DistillResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    auto fresh = rollout(student, teacher_mean, envs, steps_per_env);

    DistillIterLog iter_log;
    iter_log.iteration = it;
    iter_log.heldout_mse = fresh_mse(student, fresh);
    if (it == 0) result.initial_heldout = iter_log.heldout_mse;

    for (const auto& env_data : fresh)
      for (const auto& tr : env_data)
        data.push(tr.obs.data(), tr.label.data(), Dataset::kActorStudent);
    iter_log.dataset_size = data.size();

    // Regression on the aggregate.
    std::vector<int> indices(data.size());
    std::iota(indices.begin(), indices.end(), 0);
    double mse_sum = 0.0;
    int batches = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(indices.begin(), indices.end(), rng.engine());
      for (size_t start = 0; start + cfg.batch_size <= indices.size();
           start += cfg.batch_size) {
        std::vector<int> batch(indices.begin() + start,
                               indices.begin() + start + cfg.batch_size);
        mse_sum += student.train(data, batch);
        ++batches;
      }
      if (indices.size() < static_cast<size_t>(cfg.batch_size)) {
        mse_sum += student.train(data, indices);
        ++batches;
      }
    }
    iter_log.train_mse = batches > 0 ? mse_sum / batches : 0.0;
    result.log.push_back(iter_log);
  }

  auto final_fresh = rollout(student, teacher_mean, envs, steps_per_env);
  result.final_heldout = fresh_mse(student, final_fresh);
  return result;
}

}  // namespace keyloco::distill
