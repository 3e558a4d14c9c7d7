#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "keyloco/math.hpp"
#include "keyloco/motion/reference.hpp"
#include "keyloco/rng.hpp"

namespace keyloco::hms {

// Per-dimension running mean/std in Welford form. Population std.
struct NormalizerStats {
  struct Dim {
    uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void update(double x) {
      ++n;
      double delta = x - mean;
      mean += delta / static_cast<double>(n);
      m2 += delta * (x - mean);
    }
    double std() const { return n > 0 ? std::sqrt(m2 / static_cast<double>(n)) : 0.0; }
  };
  std::vector<Dim> dims;

  explicit NormalizerStats(int dim = kCommandDim) : dims(dim) {}

  void update(const double* x) {
    for (size_t j = 0; j < dims.size(); ++j) dims[j].update(x[j]);
  }

  // Chan et al. pairwise merge; associative within float tolerance.
  void merge(const NormalizerStats& other) {
    for (size_t j = 0; j < dims.size(); ++j) {
      Dim& a = dims[j];
      const Dim& b = other.dims[j];
      if (b.n == 0) continue;
      if (a.n == 0) {
        a = b;
        continue;
      }
      double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
      double delta = b.mean - a.mean;
      double n = na + nb;
      a.m2 += b.m2 + delta * delta * na * nb / n;
      a.mean += delta * nb / n;
      a.n += b.n;
    }
  }
};

// Frozen HMS boundary: mu +/- 1.64 sigma per dimension (~90% Gaussian mass).
struct HmsBounds {
  static constexpr double kSigmaMultiple = 1.64;
  std::vector<double> lower, upper;

  HmsBounds() = default;
  explicit HmsBounds(const NormalizerStats& stats) {
    lower.reserve(stats.dims.size());
    upper.reserve(stats.dims.size());
    for (const auto& d : stats.dims) {
      double s = d.std();
      lower.push_back(d.mean - kSigmaMultiple * s);
      upper.push_back(d.mean + kSigmaMultiple * s);
    }
  }
};

inline void update_stats(NormalizerStats& stats, const motion::KeypointCommand& cmd) {
  auto flat = cmd.flatten();
  stats.update(flat.data());
}

// Independent multiplicative noise per dimension, U(0.5, 1.5).
inline motion::KeypointCommand inject_noise(const motion::KeypointCommand& cmd, Rng& rng) {
  auto flat = cmd.flatten();
  for (auto& v : flat) v *= rng.uniform(0.5, 1.5);
  return motion::KeypointCommand::unflatten(flat.data());
}

inline void clip_to_hms(double* action, const HmsBounds& bounds) {
  for (size_t j = 0; j < bounds.lower.size(); ++j)
    action[j] = clamp(action[j], bounds.lower[j], bounds.upper[j]);
}

}  // namespace keyloco::hms
