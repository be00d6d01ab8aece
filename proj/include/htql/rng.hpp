// rng.hpp - Stateless counter-based random numbers.
//
// Every draw is a pure function of (key, counter), where the key encodes
// (seed, stream). Substreams never interact, so results do not depend on
// the order in which concurrent consumers draw, and partitioning a sample
// range across workers reproduces the single-threaded output bit for bit.
#pragma once

#include <cstdint>

namespace htql {

// SplitMix64 finalizer: a well-mixed 64-bit bijection.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Key for a (seed, stream) substream. Streams are combined through the
// mixer rather than addition so distinct streams are unrelated functions
// of the counter, not shifted copies of one sequence.
inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ (0xD2B74407B1CE6E93ULL + mix64(stream ^ 0x8BB84B93962EACC9ULL)));
}

inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b) {
    return rng_key(rng_key(seed, stream_a), stream_b);
}

// n-th 64-bit word of the substream identified by key.
inline std::uint64_t rng_word(std::uint64_t key, std::uint64_t n) {
    return mix64(key ^ mix64(n + 0x165667B19E3779F9ULL));
}

// Open-interval uniform in (0, 1): 53-bit mantissa, offset by half an ulp
// so 0 and 1 are unreachable (inverse-CDF samplers need both ends open).
inline double u64_to_open_unit(std::uint64_t w) {
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential view over one substream. Copyable; `at` gives random access.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(rng_key(seed, stream)) {}

    std::uint64_t next_u64() { return rng_word(key_, counter_++); }
    double next_unit() { return u64_to_open_unit(next_u64()); }
    double unit_at(std::uint64_t n) const { return u64_to_open_unit(rng_word(key_, n)); }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace htql
