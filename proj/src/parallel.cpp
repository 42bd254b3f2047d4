#include "gmrf/parallel.hpp"

#include <atomic>

namespace gmrf {

namespace {
std::atomic<int> configured_threads{0};
}

int default_threads() {
  const int t = configured_threads.load();
  if (t > 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_threads(int threads) { configured_threads.store(threads < 0 ? 0 : threads); }

}  // namespace gmrf
