#pragma once

#include <cstddef>
#include <functional>

namespace clvboost {

/// 0 or negative -> hardware concurrency (at least 1).
int resolve_threads(int threads);

/// Runs body(begin, end) over a static block partition of [0, count).
/// Workers never share mutable state through this helper, so results are
/// independent of the thread count. The first exception thrown by any block
/// is rethrown on the calling thread.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace clvboost
