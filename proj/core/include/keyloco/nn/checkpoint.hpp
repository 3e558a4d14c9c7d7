#pragma once

#include <string>
#include <vector>

#include "keyloco/hms/guard.hpp"
#include "keyloco/nn/mlp.hpp"

namespace keyloco::nn {

// File layout: magic "KLC1", u32 format version, kind string, topology table
// (names + shapes), parameters as little-endian float32 in declared order,
// then NormalizerStats. Round-trips bit-exactly.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
  };

  std::string kind;
  std::vector<Entry> tensors;
  hms::NormalizerStats stats{0};

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  const Entry& find(const std::string& name) const;

  // Copy parameters between checkpoint entries and live network views.
  void add_params(const std::vector<ParamView<float>>& views);
  void restore_params(std::vector<ParamView<float>>& views) const;
};

// Stable content hash of the serialized checkpoint (FNV-1a over bytes).
uint64_t file_hash(const std::string& path);

}  // namespace keyloco::nn
