#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace scarlab {

/// Counter-based deterministic generator (SplitMix64 core): value(k) depends
/// only on (seed, k), so parallel consumers and reruns agree exactly.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t x = seed_ ^ mix(counter + 0x9e3779b97f4a7c15ull);
        return mix(x);
    }

    /// uniform in [0, 1)
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// standard normal via Box-Muller on two counter lanes
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1 always
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t seed() const { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace scarlab
