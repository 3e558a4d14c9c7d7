#pragma once

#include <cmath>
#include <vector>

#include "keyloco/nn/mlp.hpp"
#include "keyloco/rng.hpp"

namespace keyloco::nn {

// Diagonal Gaussian head: MLP mean + state-independent per-dimension log-std.
template <typename T>
struct GaussianPolicy {
  Mlp<T> mean;
  std::vector<T> log_std;

  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, int act_dim, int hidden = 256)
      : mean(std::vector<int>{obs_dim, hidden, hidden, act_dim}),
        log_std(act_dim, static_cast<T>(std::log(0.6))) {}

  int act_dim() const { return static_cast<int>(log_std.size()); }

  std::vector<T> sample(const std::vector<T>& mu, Rng& rng) const {
    std::vector<T> a(mu.size());
    for (size_t j = 0; j < mu.size(); ++j)
      a[j] = mu[j] + static_cast<T>(std::exp(static_cast<double>(log_std[j])) * rng.normal());
    return a;
  }

  double log_prob(const std::vector<T>& mu, const std::vector<T>& action) const {
    double lp = 0.0;
    for (size_t j = 0; j < mu.size(); ++j) {
      double ls = log_std[j];
      double z = (action[j] - mu[j]) / std::exp(ls);
      lp += -0.5 * z * z - ls - 0.5 * std::log(2.0 * M_PI);
    }
    return lp;
  }

  double entropy() const {
    double h = 0.0;
    for (T ls : log_std) h += static_cast<double>(ls) + 0.5 * std::log(2.0 * M_PI * M_E);
    return h;
  }

  // d log_prob / d mean_j and / d log_std_j at (mu, action).
  void log_prob_grads(const std::vector<T>& mu, const std::vector<T>& action,
                      std::vector<double>& dmu, std::vector<double>& dls) const {
    dmu.resize(mu.size());
    dls.resize(mu.size());
    for (size_t j = 0; j < mu.size(); ++j) {
      double var = std::exp(2.0 * static_cast<double>(log_std[j]));
      double diff = action[j] - mu[j];
      dmu[j] = diff / var;
      dls[j] = diff * diff / var - 1.0;
    }
  }

  std::vector<ParamView<T>> params(typename Mlp<T>::Grads* mean_grads,
                                   std::vector<T>* log_std_grads,
                                   const std::string& prefix = "policy") {
    auto out = mean.params(mean_grads, prefix + ".mean");
    out.push_back({prefix + ".log_std", log_std.data(),
                   log_std_grads ? log_std_grads->data() : nullptr,
                   {static_cast<int>(log_std.size())}});
    return out;
  }
};

}  // namespace keyloco::nn
