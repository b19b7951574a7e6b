#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace chronolens {

// Worker count for parallel loops: hardware concurrency, capped by the
// CHRONOLENS_THREADS environment variable when set.
inline int thread_budget() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("CHRONOLENS_THREADS")) {
    const int parsed = std::atoi(cap);
    if (parsed >= 1) n = std::min(n, parsed);
  }
  return n;
}

}  // namespace chronolens
