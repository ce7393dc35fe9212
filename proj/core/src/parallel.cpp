#include "speechlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace speechlab {

std::size_t worker_count(std::size_t jobs) {
  std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPEECHLAB_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap > 0) workers = static_cast<std::size_t>(cap);
    } catch (const std::exception&) {
      // Ignore malformed values.
    }
  }
  return std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs, 1));
}

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& body, std::size_t threads) {
  const std::size_t workers = threads == 0 ? worker_count(jobs) : std::min(threads, std::max<std::size_t>(jobs, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace speechlab
