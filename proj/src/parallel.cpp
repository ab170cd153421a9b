#include "stokeslab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace stokeslab {

namespace {
std::atomic<int> g_threads{1};
constexpr std::size_t kMinChunk = 4096;
}  // namespace

void set_num_threads(int n) { g_threads = std::max(1, n); }

int num_threads() { return g_threads; }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(g_threads.load());
  if (workers <= 1 || count < 2 * kMinChunk) {
    fn(0, count);
    return;
  }
  const std::size_t chunks = std::min(workers, count / kMinChunk);
  const std::size_t per = (count + chunks - 1) / chunks;
  std::vector<std::jthread> pool;
  pool.reserve(chunks - 1);
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::size_t b = c * per;
    const std::size_t e = std::min(count, b + per);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(count, per));
}

}  // namespace stokeslab
