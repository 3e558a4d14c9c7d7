#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "keyloco/rng.hpp"

namespace keyloco::nn {

// Named view of one parameter tensor, used by the optimizer and checkpoints.
template <typename T>
struct ParamView {
  std::string name;
  T* data = nullptr;
  T* grad = nullptr;
  std::vector<int> shape;
  size_t size() const {
    size_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
};

// Dense net, tanh hidden layers, identity output. Weights live in the net;
// activations and gradients live in caller-owned buffers so a frozen net can
// be shared across rollout workers.
template <typename T>
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least 2 dims");
    for (size_t l = 0; l + 1 < dims_.size(); ++l) {
      w_.emplace_back(static_cast<size_t>(dims_[l]) * dims_[l + 1], T(0));
      b_.emplace_back(dims_[l + 1], T(0));
    }
  }

  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  size_t num_layers() const { return w_.size(); }

  void init(Rng& rng, double last_layer_scale = 1.0) {
    for (size_t l = 0; l < w_.size(); ++l) {
      double s = std::sqrt(6.0 / (dims_[l] + dims_[l + 1]));
      if (l + 1 == w_.size()) s *= last_layer_scale;
      for (auto& v : w_[l]) v = static_cast<T>(rng.uniform(-s, s));
      for (auto& v : b_[l]) v = T(0);
    }
  }

  struct Cache {
    // act[0] = input, act[l] = post-activation output of layer l-1.
    std::vector<std::vector<T>> act;
  };

  struct Grads {
    std::vector<std::vector<T>> gw, gb;
    void zero() {
      for (auto& g : gw) std::fill(g.begin(), g.end(), T(0));
      for (auto& g : gb) std::fill(g.begin(), g.end(), T(0));
    }
  };

  Grads make_grads() const {
    Grads g;
    for (size_t l = 0; l < w_.size(); ++l) {
      g.gw.emplace_back(w_[l].size(), T(0));
      g.gb.emplace_back(b_[l].size(), T(0));
    }
    return g;
  }

  const std::vector<T>& forward(const T* x, Cache& cache) const {
    cache.act.resize(dims_.size());
    cache.act[0].assign(x, x + dims_[0]);
    for (size_t l = 0; l < w_.size(); ++l) {
      int in = dims_[l], out = dims_[l + 1];
      auto& y = cache.act[l + 1];
      y.assign(out, T(0));
      const T* xin = cache.act[l].data();
      const T* wl = w_[l].data();
      for (int o = 0; o < out; ++o) {
        T acc = b_[l][o];
        const T* row = wl + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * xin[i];
        y[o] = (l + 1 < w_.size()) ? std::tanh(acc) : acc;
      }
    }
    return cache.act.back();
  }

  std::vector<T> forward(const std::vector<T>& x) const {
    if (static_cast<int>(x.size()) != dims_[0])
      throw std::invalid_argument("Mlp::forward: input dim mismatch");
    Cache c;
    return forward(x.data(), c);
  }

  // Accumulates parameter gradients into `grads`; optionally writes dL/dinput.
  void backward(const Cache& cache, const std::vector<T>& dy, Grads& grads,
                std::vector<T>* dx = nullptr) const {
    std::vector<T> delta = dy;  // dL/d(pre-activation output of current layer)
    for (size_t li = w_.size(); li-- > 0;) {
      int in = dims_[li], out = dims_[li + 1];
      const auto& xin = cache.act[li];
      if (li + 1 < w_.size()) {
        // Through tanh: act stores tanh(z); d tanh = 1 - act^2.
        const auto& a = cache.act[li + 1];
        for (int o = 0; o < out; ++o) delta[o] *= (T(1) - a[o] * a[o]);
      }
      T* gw = grads.gw[li].data();
      const T* wl = w_[li].data();
      for (int o = 0; o < out; ++o) {
        grads.gb[li][o] += delta[o];
        T* grow = gw + static_cast<size_t>(o) * in;
        T d = delta[o];
        for (int i = 0; i < in; ++i) grow[i] += d * xin[i];
      }
      if (li > 0 || dx) {
        std::vector<T> dprev(in, T(0));
        for (int o = 0; o < out; ++o) {
          const T* row = wl + static_cast<size_t>(o) * in;
          T d = delta[o];
          for (int i = 0; i < in; ++i) dprev[i] += d * row[i];
        }
        if (li == 0 && dx) *dx = dprev;
        delta = std::move(dprev);
      }
    }
  }

  std::vector<ParamView<T>> params(Grads* grads = nullptr,
                                   const std::string& prefix = "mlp") {
    std::vector<ParamView<T>> out;
    for (size_t l = 0; l < w_.size(); ++l) {
      out.push_back({prefix + ".w" + std::to_string(l), w_[l].data(),
                     grads ? grads->gw[l].data() : nullptr,
                     {dims_[l + 1], dims_[l]}});
      out.push_back({prefix + ".b" + std::to_string(l), b_[l].data(),
                     grads ? grads->gb[l].data() : nullptr,
                     {dims_[l + 1]}});
    }
    return out;
  }

  template <typename U>
  Mlp<U> cast() const {
    Mlp<U> out(dims_);
    for (size_t l = 0; l < w_.size(); ++l) {
      for (size_t i = 0; i < w_[l].size(); ++i) out.weights(l)[i] = static_cast<U>(w_[l][i]);
      for (size_t i = 0; i < b_[l].size(); ++i) out.biases(l)[i] = static_cast<U>(b_[l][i]);
    }
    return out;
  }

  std::vector<T>& weights(size_t l) { return w_[l]; }
  std::vector<T>& biases(size_t l) { return b_[l]; }
  const std::vector<T>& weights(size_t l) const { return w_[l]; }
  const std::vector<T>& biases(size_t l) const { return b_[l]; }

 private:
  std::vector<int> dims_;
  std::vector<std::vector<T>> w_;  // per layer, out x in row-major
  std::vector<std::vector<T>> b_;
};

}  // namespace keyloco::nn
