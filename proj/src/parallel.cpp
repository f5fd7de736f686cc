#include "needle/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace needle {
namespace {

std::atomic<int> g_threads{1};

int env_threads() {
  const char* env = std::getenv("NEEDLE_THREADS");
  if (env == nullptr) return 0;
  try {
    return std::max(1, std::stoi(env));
  } catch (...) {
    return 0;
  }
}

}  // namespace

void set_thread_count(int threads) { g_threads = std::max(1, threads); }

int thread_count() {
  const int env = env_threads();
  return env > 0 ? env : g_threads.load();
}

void parallel_shards(std::size_t count,
                     const std::function<void(int, std::size_t, std::size_t)>& body) {
  const int shards = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(thread_count()),
                            std::max<std::size_t>(count, 1)));
  if (shards <= 1) {
    body(0, 0, count);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(shards);
  workers.reserve(shards);
  for (int s = 0; s < shards; ++s) {
    const std::size_t begin = count * s / shards;
    const std::size_t end = count * (s + 1) / shards;
    workers.emplace_back([&body, &errors, s, begin, end] {
      try {
        body(s, begin, end);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  // Rethrow the first failure in shard order.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace needle
