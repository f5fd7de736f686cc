#pragma once

#include <cstddef>
#include <functional>

namespace needle {

// Worker count used by the sharded checks. NEEDLE_THREADS overrides the
// programmatic setting when present.
void set_thread_count(int threads);
int thread_count();

// Runs body(shard, begin, end) over [0, count) split into contiguous shards.
// An exception thrown by a shard is rethrown on the calling thread.
// Shard boundaries depend only on count and the shard count, so reductions
// merged in shard order are deterministic.
void parallel_shards(std::size_t count,
                     const std::function<void(int, std::size_t, std::size_t)>& body);

}  // namespace needle
