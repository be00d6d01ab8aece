// parallel.hpp - Deterministic work partitioning.
//
// Work is split into a fixed chunk grid that depends only on the item count,
// never on the worker count; workers pick chunks off a shared atomic index
// and write into caller-owned per-chunk slots. Combining the slots in chunk
// order afterwards makes every reduction independent of scheduling.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace htql {

// Effective worker count: `requested` if nonzero, otherwise hardware
// concurrency, in both cases capped by the HTQL_THREADS environment
// variable when set.
std::size_t worker_count(std::size_t requested = 0);

struct ChunkGrid {
    std::uint64_t items = 0;
    std::uint64_t chunk_size = 0;
    std::uint64_t chunks = 0;
};

// 64 chunks per ~million items keeps slot vectors small while leaving
// enough chunks for load balancing on any sane worker count.
ChunkGrid chunk_grid(std::uint64_t items, std::uint64_t min_chunk = 16384);

// Runs fn(chunk_index, begin, end) for every chunk, on `workers` threads
// (0 = automatic). fn must only touch state owned by its chunk index.
void for_each_chunk(const ChunkGrid& grid,
                    const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& fn,
                    std::size_t workers = 0);

} // namespace htql
