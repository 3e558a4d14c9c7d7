#include "keyloco/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace keyloco::nn {

namespace {

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), s.size());
}

std::string read_string(std::istream& is) {
  uint32_t len = read_pod<uint32_t>(is);
  if (len > 1u << 20) throw std::runtime_error("checkpoint: bad string length");
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
  os.write("KLC1", 4);
  write_pod<uint32_t>(os, kVersion);
  write_string(os, kind);
  write_pod<uint32_t>(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    write_string(os, t.name);
    write_pod<uint32_t>(os, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) write_pod<int32_t>(os, d);
  }
  for (const auto& t : tensors)
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  write_pod<uint32_t>(os, static_cast<uint32_t>(stats.dims.size()));
  for (const auto& d : stats.dims) {
    write_pod<uint64_t>(os, d.n);
    write_pod<double>(os, d.mean);
    write_pod<double>(os, d.m2);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "KLC1", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  uint32_t version = read_pod<uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  Checkpoint ckpt;
  ckpt.kind = read_string(is);
  uint32_t n_tensors = read_pod<uint32_t>(is);
  ckpt.tensors.resize(n_tensors);
  for (auto& t : ckpt.tensors) {
    t.name = read_string(is);
    uint32_t ndims = read_pod<uint32_t>(is);
    t.shape.resize(ndims);
    size_t count = 1;
    for (auto& d : t.shape) {
      d = read_pod<int32_t>(is);
      count *= static_cast<size_t>(d);
    }
    t.data.resize(count);
  }
  for (auto& t : ckpt.tensors) {
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is) throw std::runtime_error("checkpoint: truncated parameters");
  }
  uint32_t stat_dim = read_pod<uint32_t>(is);
  ckpt.stats = hms::NormalizerStats(static_cast<int>(stat_dim));
  for (auto& d : ckpt.stats.dims) {
    d.n = read_pod<uint64_t>(is);
    d.mean = read_pod<double>(is);
    d.m2 = read_pod<double>(is);
  }
  return ckpt;
}

const Checkpoint::Entry& Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

void Checkpoint::add_params(const std::vector<ParamView<float>>& views) {
  for (const auto& v : views) {
    Entry e;
    e.name = v.name;
    e.shape = v.shape;
    e.data.assign(v.data, v.data + v.size());
    tensors.push_back(std::move(e));
  }
}

void Checkpoint::restore_params(std::vector<ParamView<float>>& views) const {
  for (auto& v : views) {
    const Entry& e = find(v.name);
    if (e.data.size() != v.size())
      throw std::runtime_error("checkpoint: shape mismatch for " + v.name);
    std::copy(e.data.begin(), e.data.end(), v.data);
  }
}

uint64_t file_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("file_hash: cannot open: " + path);
  uint64_t h = 14695981039346656037ull;
  char buf[4096];
  while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!is) break;
  }
  return h;
}

}  // namespace keyloco::nn
