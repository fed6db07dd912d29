#include "condtrans/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace condtrans {

int worker_count() {
  static const int count = [] {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("CONDTRANS_THREADS")) {
      try {
        const int cap = std::stoi(env);
        if (cap >= 1) n = std::min(n, cap);
      } catch (const std::exception&) {
        // ignore malformed values, keep the hardware default
      }
    }
    return n;
  }();
  return count;
}

void parallel_for(std::ptrdiff_t n,
                  const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& body) {
  if (n <= 0) return;
  const int workers = std::min<std::ptrdiff_t>(worker_count(), n);
  if (workers <= 1 || n < 64) {
    body(0, n);
    return;
  }
  const std::ptrdiff_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::ptrdiff_t begin = w * chunk;
    const std::ptrdiff_t end = std::min<std::ptrdiff_t>(begin + chunk, n);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace condtrans
