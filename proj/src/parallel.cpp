#include "degenbill/parallel.hpp"

namespace degenbill {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
  const int w = g_workers.load();
  if (w > 0) return w;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_default_workers(int n) { g_workers.store(n); }

}  // namespace degenbill
