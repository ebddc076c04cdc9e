#include "caplab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace caplab {
namespace {

constexpr std::size_t kChunkCount = 64;

std::atomic<int>& configured_threads() {
  static std::atomic<int> n = [] {
    if (const char* env = std::getenv("CAPLAB_THREADS")) {
      try {
        const int v = std::stoi(env);
        if (v > 0) return v;
      } catch (...) {
      }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }();
  return n;
}

void run_chunks(std::size_t n,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t chunks = std::min(kChunkCount, n);
  auto bounds = [&](std::size_t c) { return n * c / chunks; };
  const int workers = std::min<int>(configured_threads().load(), static_cast<int>(chunks));
  if (workers <= 1 || n < 256) {
    for (std::size_t c = 0; c < chunks; ++c) body(c, bounds(c), bounds(c + 1));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) body(c, bounds(c), bounds(c + 1));
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

}  // namespace

int thread_count() { return configured_threads().load(); }

void set_thread_count(int n) { configured_threads().store(std::max(1, n)); }

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  run_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) { body(b, e); });
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  parallel_chunks(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  if (n == 0) return 0.0;
  std::vector<double> partial(std::min(kChunkCount, n), 0.0);
  run_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace caplab
