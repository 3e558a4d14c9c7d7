#include "keyloco/pipeline/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "keyloco/version.hpp"

namespace keyloco::pipeline {

using nlohmann::json;

namespace {

json artifacts_json(const std::vector<RunManifest::Artifact>& list) {
  json out = json::array();
  for (const auto& a : list) out.push_back({{"path", a.path}, {"hash", a.hash}});
  return out;
}

std::vector<RunManifest::Artifact> artifacts_from(const json& j) {
  std::vector<RunManifest::Artifact> out;
  for (const auto& e : j) out.push_back({e.at("path"), e.at("hash")});
  return out;
}

}  // namespace

void RunManifest::save(const std::string& path) const {
  json j;
  j["stage"] = stage;
  j["config_hash"] = config_hash;
  j["build_id"] = build_id;
  j["inputs"] = artifacts_json(inputs);
  j["outputs"] = artifacts_json(outputs);
  j["seeds"] = seeds;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("manifest: cannot open " + path);
  os << j.dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("manifest: cannot open " + path);
  json j = json::parse(is);
  RunManifest m;
  m.stage = j.at("stage");
  m.config_hash = j.at("config_hash");
  m.build_id = j.at("build_id");
  m.inputs = artifacts_from(j.at("inputs"));
  m.outputs = artifacts_from(j.at("outputs"));
  m.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  m.started_at = j.at("started_at");
  m.finished_at = j.at("finished_at");
  return m;
}

std::string build_id() { return std::string("keyloco-") + kVersion; }

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace keyloco::pipeline
