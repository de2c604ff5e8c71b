#pragma once

#include <cstdint>

namespace episens {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, index), so results do not depend on evaluation order.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

    /// 64 random bits for (stream, index).
    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
        std::uint64_t h = mix(seed_ ^ 0x243F6A8885A308D3ULL);
        h = mix(h ^ (stream * 0x9E3779B97F4A7C15ULL));
        return mix(h ^ (index + 0xD1B54A32D192ED03ULL));
    }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t stream, std::uint64_t index) const {
        return static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer on [lo, hi]; requires lo <= hi and a span well below 2^53.
    constexpr std::int64_t integer(std::uint64_t stream, std::uint64_t index, std::int64_t lo,
                                   std::int64_t hi) const {
        const auto span = static_cast<double>(hi - lo) + 1.0;
        const auto k = static_cast<std::int64_t>(uniform(stream, index) * span);
        return lo + (k > hi - lo ? hi - lo : k);
    }

    constexpr std::uint64_t seed() const { return seed_; }

    /// SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
};

}  // namespace episens
