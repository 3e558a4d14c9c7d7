#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "keyloco/nn/mlp.hpp"
#include "keyloco/rng.hpp"

namespace keyloco::nn {

// 3x3 stride-2 conv, pad 1, tanh. Feature maps are [c][y][x] row-major.
template <typename T>
struct ConvLayer {
  int in_ch = 0, out_ch = 0, in_h = 0, in_w = 0;
  std::vector<T> w;  // out_ch x in_ch x 3 x 3
  std::vector<T> b;

  ConvLayer() = default;
  ConvLayer(int ic, int oc, int h, int wdt)
      : in_ch(ic), out_ch(oc), in_h(h), in_w(wdt),
        w(static_cast<size_t>(oc) * ic * 9, T(0)), b(oc, T(0)) {}

  int out_h() const { return (in_h - 1) / 2 + 1; }
  int out_w() const { return (in_w - 1) / 2 + 1; }

  void forward(const T* x, T* y) const {
    int oh = out_h(), ow = out_w();
    for (int oc = 0; oc < out_ch; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = b[oc];
          for (int ic = 0; ic < in_ch; ++ic) {
            const T* plane = x + static_cast<size_t>(ic) * in_h * in_w;
            const T* ker = w.data() + ((static_cast<size_t>(oc) * in_ch + ic) * 9);
            for (int ky = 0; ky < 3; ++ky) {
              int iy = 2 * oy - 1 + ky;
              if (iy < 0 || iy >= in_h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                int ix = 2 * ox - 1 + kx;
                if (ix < 0 || ix >= in_w) continue;
                acc += ker[ky * 3 + kx] * plane[iy * in_w + ix];
              }
            }
          }
          y[(static_cast<size_t>(oc) * oh + oy) * ow + ox] = std::tanh(acc);
        }
      }
    }
  }

  // dy is dL/d(post-tanh output); x and y are the cached input/output.
  void backward(const T* x, const T* y, const T* dy, T* gw, T* gb, T* dx) const {
    int oh = out_h(), ow = out_w();
    for (int oc = 0; oc < out_ch; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          size_t oi = (static_cast<size_t>(oc) * oh + oy) * ow + ox;
          T d = dy[oi] * (T(1) - y[oi] * y[oi]);
          gb[oc] += d;
          for (int ic = 0; ic < in_ch; ++ic) {
            const T* plane = x + static_cast<size_t>(ic) * in_h * in_w;
            size_t kbase = (static_cast<size_t>(oc) * in_ch + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
              int iy = 2 * oy - 1 + ky;
              if (iy < 0 || iy >= in_h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                int ix = 2 * ox - 1 + kx;
                if (ix < 0 || ix >= in_w) continue;
                gw[kbase + ky * 3 + kx] += d * plane[iy * in_w + ix];
                if (dx)
                  dx[static_cast<size_t>(ic) * in_h * in_w + iy * in_w + ix] +=
                      d * w[kbase + ky * 3 + kx];
              }
            }
          }
        }
      }
    }
  }
};

// 80x45 depth frame -> 8/16/32-channel conv stages -> 64 tanh features.
template <typename T>
class DepthEncoder {
 public:
  static constexpr int kWidth = 80, kHeight = 45, kFeatures = 64;

  DepthEncoder() {
    stages_.emplace_back(1, 8, kHeight, kWidth);
    stages_.emplace_back(8, 16, stages_[0].out_h(), stages_[0].out_w());
    stages_.emplace_back(16, 32, stages_[1].out_h(), stages_[1].out_w());
    flat_dim_ = 32 * stages_[2].out_h() * stages_[2].out_w();
    fc_w_.assign(static_cast<size_t>(kFeatures) * flat_dim_, T(0));
    fc_b_.assign(kFeatures, T(0));
  }

  int flat_dim() const { return flat_dim_; }

  void init(Rng& rng) {
    for (auto& st : stages_) {
      double s = std::sqrt(6.0 / (st.in_ch * 9 + st.out_ch * 9));
      for (auto& v : st.w) v = static_cast<T>(rng.uniform(-s, s));
    }
    double s = std::sqrt(6.0 / (flat_dim_ + kFeatures));
    for (auto& v : fc_w_) v = static_cast<T>(rng.uniform(-s, s));
  }

  struct Cache {
    std::vector<std::vector<T>> maps;  // maps[0] = input image, maps[i] = stage i output
    std::vector<T> feat;               // post-tanh features
  };

  struct Grads {
    std::vector<std::vector<T>> gw, gb;  // per stage
    std::vector<T> gfw, gfb;
    void zero() {
      for (auto& g : gw) std::fill(g.begin(), g.end(), T(0));
      for (auto& g : gb) std::fill(g.begin(), g.end(), T(0));
      std::fill(gfw.begin(), gfw.end(), T(0));
      std::fill(gfb.begin(), gfb.end(), T(0));
    }
  };

  Grads make_grads() const {
    Grads g;
    for (const auto& st : stages_) {
      g.gw.emplace_back(st.w.size(), T(0));
      g.gb.emplace_back(st.b.size(), T(0));
    }
    g.gfw.assign(fc_w_.size(), T(0));
    g.gfb.assign(fc_b_.size(), T(0));
    return g;
  }

  const std::vector<T>& forward(const T* img, Cache& cache) const {
    cache.maps.resize(stages_.size() + 1);
    cache.maps[0].assign(img, img + kWidth * kHeight);
    for (size_t s = 0; s < stages_.size(); ++s) {
      const auto& st = stages_[s];
      cache.maps[s + 1].assign(
          static_cast<size_t>(st.out_ch) * st.out_h() * st.out_w(), T(0));
      st.forward(cache.maps[s].data(), cache.maps[s + 1].data());
    }
    cache.feat.assign(kFeatures, T(0));
    const T* flat = cache.maps.back().data();
    for (int o = 0; o < kFeatures; ++o) {
      T acc = fc_b_[o];
      const T* row = fc_w_.data() + static_cast<size_t>(o) * flat_dim_;
      for (int i = 0; i < flat_dim_; ++i) acc += row[i] * flat[i];
      cache.feat[o] = std::tanh(acc);
    }
    return cache.feat;
  }

  void backward(const Cache& cache, const std::vector<T>& dfeat, Grads& grads,
                std::vector<T>* dimg = nullptr) const {
    std::vector<T> dflat(flat_dim_, T(0));
    const T* flat = cache.maps.back().data();
    for (int o = 0; o < kFeatures; ++o) {
      T d = dfeat[o] * (T(1) - cache.feat[o] * cache.feat[o]);
      grads.gfb[o] += d;
      T* grow = grads.gfw.data() + static_cast<size_t>(o) * flat_dim_;
      const T* row = fc_w_.data() + static_cast<size_t>(o) * flat_dim_;
      for (int i = 0; i < flat_dim_; ++i) {
        grow[i] += d * flat[i];
        dflat[i] += d * row[i];
      }
    }
    std::vector<T> dcur = std::move(dflat);
    for (size_t s = stages_.size(); s-- > 0;) {
      const auto& st = stages_[s];
      std::vector<T> dprev(cache.maps[s].size(), T(0));
      bool want_dx = s > 0 || dimg != nullptr;
      st.backward(cache.maps[s].data(), cache.maps[s + 1].data(), dcur.data(),
                  grads.gw[s].data(), grads.gb[s].data(),
                  want_dx ? dprev.data() : nullptr);
      if (s == 0 && dimg) *dimg = dprev;
      dcur = std::move(dprev);
    }
  }

  std::vector<ParamView<T>> params(Grads* grads = nullptr,
                                   const std::string& prefix = "enc") {
    std::vector<ParamView<T>> out;
    for (size_t s = 0; s < stages_.size(); ++s) {
      auto& st = stages_[s];
      out.push_back({prefix + ".conv" + std::to_string(s) + ".w", st.w.data(),
                     grads ? grads->gw[s].data() : nullptr,
                     {st.out_ch, st.in_ch, 3, 3}});
      out.push_back({prefix + ".conv" + std::to_string(s) + ".b", st.b.data(),
                     grads ? grads->gb[s].data() : nullptr, {st.out_ch}});
    }
    out.push_back({prefix + ".fc.w", fc_w_.data(), grads ? grads->gfw.data() : nullptr,
                   {kFeatures, flat_dim_}});
    out.push_back({prefix + ".fc.b", fc_b_.data(), grads ? grads->gfb.data() : nullptr,
                   {kFeatures}});
    return out;
  }

  template <typename U>
  DepthEncoder<U> cast() const {
    DepthEncoder<U> out;
    for (size_t s = 0; s < stages_.size(); ++s) {
      for (size_t i = 0; i < stages_[s].w.size(); ++i)
        out.stage(s).w[i] = static_cast<U>(stages_[s].w[i]);
      for (size_t i = 0; i < stages_[s].b.size(); ++i)
        out.stage(s).b[i] = static_cast<U>(stages_[s].b[i]);
    }
    for (size_t i = 0; i < fc_w_.size(); ++i) out.fc_w()[i] = static_cast<U>(fc_w_[i]);
    for (size_t i = 0; i < fc_b_.size(); ++i) out.fc_b()[i] = static_cast<U>(fc_b_[i]);
    return out;
  }

  ConvLayer<T>& stage(size_t s) { return stages_[s]; }
  std::vector<T>& fc_w() { return fc_w_; }
  std::vector<T>& fc_b() { return fc_b_; }

 private:
  std::vector<ConvLayer<T>> stages_;
  int flat_dim_ = 0;
  std::vector<T> fc_w_, fc_b_;
};

}  // namespace keyloco::nn
