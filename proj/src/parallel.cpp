#include "htql/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace htql {

std::size_t worker_count(std::size_t requested) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::thread::hardware_concurrency();
        if (n == 0) n = 1;
    }
    if (const char* env = std::getenv("HTQL_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0 && static_cast<std::size_t>(cap) < n)
            n = static_cast<std::size_t>(cap);
    }
    return n;
}

ChunkGrid chunk_grid(std::uint64_t items, std::uint64_t min_chunk) {
    ChunkGrid g;
    g.items = items;
    if (items == 0) return g;
    g.chunk_size = min_chunk;
    g.chunks = (items + g.chunk_size - 1) / g.chunk_size;
    return g;
}

void for_each_chunk(const ChunkGrid& grid,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn,
                    std::size_t workers) {
    if (grid.chunks == 0) return;
    std::size_t n_workers = worker_count(workers);
    if (n_workers > grid.chunks) n_workers = static_cast<std::size_t>(grid.chunks);

    auto run_chunk = [&](std::uint64_t c) {
        std::uint64_t begin = c * grid.chunk_size;
        std::uint64_t end = begin + grid.chunk_size;
        if (end > grid.items) end = grid.items;
        fn(c, begin, end);
    };

    if (n_workers <= 1) {
        for (std::uint64_t c = 0; c < grid.chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
                if (c >= grid.chunks) return;
                run_chunk(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace htql
