#pragma once

#include <cstddef>
#include <functional>

namespace airdbm {

// Number of worker threads used when a caller passes threads = 0.
unsigned default_thread_count() noexcept;

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
// Blocks until every index is done; the first exception thrown by any body is
// rethrown on the calling thread after all workers have joined.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace airdbm
