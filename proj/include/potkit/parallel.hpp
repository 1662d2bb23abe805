#pragma once

#include <cstddef>
#include <functional>

namespace potkit {

int default_thread_count();

// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are
// claimed dynamically; callers store per-item results and reduce in index
// order so the outcome is independent of the schedule.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace potkit
