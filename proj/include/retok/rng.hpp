#pragma once

#include <cstdint>
#include <vector>

namespace retok {

/// Counter-based generator: draw i (1-based) of stream `seed` is
/// splitmix64_mix(seed + i * 0x9E3779B97F4A7C15). Identical seeds produce
/// identical streams on every platform, and `fork(k)` derives an independent
/// child stream without touching the parent's position.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() noexcept {
        ++counter_;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    CounterRng fork(std::uint64_t stream) const noexcept {
        return CounterRng(mix(seed_ ^ mix(stream + 0x632BE59BD9B4E019ULL)));
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace retok
