#pragma once

#include <cstdint>
#include <functional>

namespace salem2d {

// Worker count for fork-join loops; 0 = hardware concurrency. The CLI sets
// this from --threads or SALEM2D_THREADS.
void set_thread_count(int n);
int thread_count();

// Static chunking with a fixed chunk grid, so results that are merged in
// chunk order do not depend on the worker count.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t min_chunk = 1024);

} // namespace salem2d
