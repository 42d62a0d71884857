#include "clvboost/parallel.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clvboost {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const int t = resolve_threads(threads);
  if (count == 0) return;
  if (t <= 1 || count < 2 * static_cast<std::size_t>(t)) {
    body(0, count);
    return;
  }

  const std::size_t blocks = static_cast<std::size_t>(t);
  const std::size_t chunk = (count + blocks - 1) / blocks;
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run = [&](std::size_t begin, std::size_t end) {
    try {
      body(begin, end);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(blocks - 1);
  for (std::size_t b = 1; b < blocks; ++b) {
    const std::size_t begin = b * chunk;
    if (begin >= count) break;
    workers.emplace_back(run, begin, std::min(begin + chunk, count));
  }
  run(0, std::min(chunk, count));
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace clvboost
