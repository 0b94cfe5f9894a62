// rng.hpp — deterministic seeding utilities
//
// All randomness in the library flows from explicit 64-bit seeds through
// these helpers, so identical (seed, parameters) always reproduce identical
// results bit-for-bit, independent of platform RNG library details and of
// how work is scheduled across threads.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace qcat {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (stream + 1));
    splitmix64(s);
    return s;
}

// Small counter-based generator; enough statistical quality for sampling
// phase-space points and state indices.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so that small seeds do not produce small first outputs
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1), 53-bit resolution
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        // modulo bias is irrelevant at our n << 2^64
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
};

// k distinct indices drawn uniformly from [0, n), in ascending order.
inline std::vector<int> sample_distinct_indices(int n, int k, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    for (int i = 0; i < k; ++i) {
        int j = i + int(rng.next_below(std::uint64_t(n - i)));
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace qcat
