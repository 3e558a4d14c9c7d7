#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace keyloco {

// Worker cap: KEYLOCO_THREADS env var, else min(hardware, 8).
inline int worker_count() {
  if (const char* env = std::getenv("KEYLOCO_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(hw == 0 ? 1 : std::min(hw, 8u));
}

// Static block partition so results do not depend on scheduling.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    int lo = static_cast<int>(static_cast<int64_t>(n) * t / workers);
    int hi = static_cast<int>(static_cast<int64_t>(n) * (t + 1) / workers);
    threads.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace keyloco
