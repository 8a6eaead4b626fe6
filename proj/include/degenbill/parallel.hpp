#pragma once

// Ordered parallel map over an index range. Results land in their slot, so the
// output does not depend on the worker count. The first exception (by index)
// is rethrown after all workers have joined.

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace degenbill {

int default_workers();
void set_default_workers(int n);

template <class T, class F>
std::vector<T> parallel_map(int count, F&& f, int workers = 0) {
  std::vector<T> out(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return out;
  if (workers <= 0) workers = default_workers();
  workers = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(out.size());
  if (workers == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    auto run = [&] {
      for (int i = next++; i < count; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace degenbill
