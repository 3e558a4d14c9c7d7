#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "keyloco/nn/mlp.hpp"

namespace keyloco::nn {

// Standard first/second-moment adaptive update with bias correction.
// Moments are kept in double regardless of the parameter type.
template <typename T>
class Adam {
 public:
  double lr = 3e-4;
  double beta1 = 0.9, beta2 = 0.999;
  double eps = 1e-8;

  explicit Adam(double lr_ = 3e-4) : lr(lr_) {}

  void attach(const std::vector<ParamView<T>>& params) {
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
    t_ = 0;
    skipped_ = 0;
  }

  // Returns false (and skips the whole step) if any gradient is non-finite.
  bool step(std::vector<ParamView<T>>& params) {
    for (const auto& p : params)
      for (size_t i = 0; i < p.size(); ++i)
        if (!std::isfinite(static_cast<double>(p.grad[i]))) {
          ++skipped_;
          return false;
        }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (size_t k = 0; k < params.size(); ++k) {
      auto& p = params[k];
      for (size_t i = 0; i < p.size(); ++i) {
        double g = p.grad[i];
        m_[k][i] = beta1 * m_[k][i] + (1.0 - beta1) * g;
        v_[k][i] = beta2 * v_[k][i] + (1.0 - beta2) * g * g;
        double mhat = m_[k][i] / bc1;
        double vhat = v_[k][i] / bc2;
        p.data[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
    return true;
  }

  int64_t steps() const { return t_; }
  int skipped() const { return skipped_; }

 private:
  std::vector<std::vector<double>> m_, v_;
  int64_t t_ = 0;
  int skipped_ = 0;
};

}  // namespace keyloco::nn
