#pragma once

#include <cstddef>
#include <functional>

namespace fracheat {

/// Worker count: FRACHEAT_THREADS if set and positive, otherwise the hardware concurrency.
std::size_t worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Exceptions from workers are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fracheat
