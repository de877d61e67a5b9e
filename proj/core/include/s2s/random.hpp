#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace s2s {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Counter-based seed derivation: stream `stream` of master seed `seed` is a
// pure function of the pair, so any trial can be replayed in isolation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

// Runs fn(i) for i in [0, count) across worker threads. Each index must write
// only to its own output slot; the caller reduces in index order afterwards.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned max_workers = 0) {
  unsigned workers = max_workers != 0 ? max_workers : std::thread::hardware_concurrency();
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (workers > count) workers = static_cast<unsigned>(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace s2s
