#pragma once

#include <cstdint>

namespace mstep {

/// Counter-based deterministic generator (SplitMix64 finalizer over a
/// seed/stream/counter triple). Worker-indexed substreams make parallel runs
/// reproducible: stream s of seed x is independent of stream s' != s.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(mix(seed + 0x9e3779b97f4a7c15ull * (stream + 1))) {}

    std::uint64_t next() { return mix(base_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    /// Uniform value in [0, bound) via rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t(0) >> __builtin_clzll((bound - 1) | 1);
        for (;;) {
            std::uint64_t v = next() & mask;
            if (v < bound) return v;
        }
    }

    bool bit() { return next() & 1; }

    CounterRng substream(std::uint64_t s) const {
        CounterRng r(0);
        r.base_ = mix(base_ + 0x9e3779b97f4a7c15ull * (s + 0x5851f42d4c957f2dull));
        return r;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t base_;
    std::uint64_t ctr_ = 0;
};

}  // namespace mstep
