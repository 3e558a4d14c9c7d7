#pragma once

#include <cstdint>
#include <random>

namespace keyloco {

// One stream per environment / episode keeps parallel rollouts reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  // Derive an independent stream, e.g. per env index or per episode.
  static Rng derive(uint64_t seed, uint64_t stream) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32),
                      0x9e3779b9u};
    std::mt19937_64 g(seq);
    Rng r;
    r.gen_ = g;
    return r;
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double std = 1.0) {
    return std::normal_distribution<double>(mean, std)(gen_);
  }
  // Uniform in [0, n).
  int64_t index(int64_t n) {
    return std::uniform_int_distribution<int64_t>(0, n - 1)(gen_);
  }
  bool bernoulli(double p) {
    return std::bernoulli_distribution(p)(gen_);
  }
  uint64_t raw() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace keyloco
