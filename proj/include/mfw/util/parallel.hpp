#pragma once

#include <cstddef>
#include <functional>

namespace mfw {

// Number of worker threads: explicit request > MFW_THREADS env > hardware.
std::size_t resolve_threads(std::size_t requested);

// Static partition of [0, n) into contiguous chunks, one per thread.
// fn(begin, end) runs on a worker; results must be written to disjoint
// slots so that the outcome does not depend on the thread count.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace mfw
