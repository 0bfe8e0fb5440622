#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmp::par {

// Fixed chunk size for reductions. Partial results are computed per chunk
// (serially within a chunk) and combined in chunk-index order, so the result
// is bit-identical for any thread count, including the serial path.
inline constexpr std::ptrdiff_t kChunk = 64;

// Process-wide switch between the OpenMP and serial executors. Both paths
// share the same chunking and combine order; toggling this must never change
// a single output bit. Tests assert exactly that.
bool enabled();
void set_enabled(bool on);

inline std::ptrdiff_t chunk_count(std::ptrdiff_t n)
{
    return n <= 0 ? 0 : (n + kChunk - 1) / kChunk;
}

// fn(i) for each i in [0, n); iterations must be independent.
template <class Fn>
void for_each(std::ptrdiff_t n, Fn &&fn)
{
#ifdef _OPENMP
    if (enabled() && n > 1) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i)
        fn(i);
}

template <class Fn>
void for_each_serial(std::ptrdiff_t n, Fn &&fn)
{
    for (std::ptrdiff_t i = 0; i < n; ++i)
        fn(i);
}

namespace detail {

template <class Acc, class ChunkFn, class Combine, class Executor>
Acc chunked_reduce_impl(std::ptrdiff_t n, ChunkFn &&chunk_fn, Combine &&combine,
                        Executor &&exec)
{
    const std::ptrdiff_t nc = chunk_count(n);
    std::vector<Acc> parts(static_cast<std::size_t>(nc));
    exec(nc, [&](std::ptrdiff_t c) {
        const std::ptrdiff_t lo = c * kChunk;
        const std::ptrdiff_t hi = std::min(n, lo + kChunk);
        parts[static_cast<std::size_t>(c)] = chunk_fn(lo, hi);
    });
    Acc acc = std::move(parts[0]);
    for (std::ptrdiff_t c = 1; c < nc; ++c)
        combine(acc, std::move(parts[static_cast<std::size_t>(c)]));
    return acc;
}

} // namespace detail

// chunk_fn(lo, hi) -> Acc over [lo, hi); combine(acc, part) folds partials in
// chunk order. Requires n >= 1.
template <class Acc, class ChunkFn, class Combine>
Acc chunked_reduce(std::ptrdiff_t n, ChunkFn &&chunk_fn, Combine &&combine)
{
    return detail::chunked_reduce_impl<Acc>(
        n, std::forward<ChunkFn>(chunk_fn), std::forward<Combine>(combine),
        [](std::ptrdiff_t nc, auto &&fn) { for_each(nc, fn); });
}

// Serial reference executor with identical chunking; kept for tests and the
// kernel benchmark.
template <class Acc, class ChunkFn, class Combine>
Acc chunked_reduce_serial(std::ptrdiff_t n, ChunkFn &&chunk_fn, Combine &&combine)
{
    return detail::chunked_reduce_impl<Acc>(
        n, std::forward<ChunkFn>(chunk_fn), std::forward<Combine>(combine),
        [](std::ptrdiff_t nc, auto &&fn) { for_each_serial(nc, fn); });
}

} // namespace cmp::par
