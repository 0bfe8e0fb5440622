#include "cmp/parallel.hpp"

#include <atomic>

namespace cmp::par {

namespace {
std::atomic<bool> parallel_on{true};
}

bool enabled()
{
    return parallel_on.load(std::memory_order_relaxed);
}

void set_enabled(bool on)
{
    parallel_on.store(on, std::memory_order_relaxed);
}

} // namespace cmp::par
