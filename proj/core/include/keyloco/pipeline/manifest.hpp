#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace keyloco::pipeline {

// Provenance record written next to every stage output. Timestamps are
// informational; all reproducibility guarantees hang on config hash + seeds.
struct RunManifest {
  std::string stage;
  uint64_t config_hash = 0;
  std::string build_id;

  struct Artifact {
    std::string path;
    uint64_t hash = 0;
  };
  std::vector<Artifact> inputs;
  std::vector<Artifact> outputs;
  std::vector<uint64_t> seeds;
  std::string started_at, finished_at;  // ISO 8601 UTC

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

std::string build_id();
std::string utc_now();

}  // namespace keyloco::pipeline
