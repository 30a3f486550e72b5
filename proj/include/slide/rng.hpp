#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace slide {

// Counter-based generator: splitmix64-counter-v1.
//
// The value at counter k under seed s is the splitmix64 finalizer applied to
// s + (k+1) * 0x9E3779B97F4A7C15, i.e. the (k+1)-th output of a splitmix64
// stream seeded with s. Being a pure function of (seed, counter) it replays
// bit-exactly on any platform and supports sharded evaluation. The algorithm
// identifier below is written into run reports next to the seeds.
inline constexpr const char* kRngAlgorithm = "splitmix64-counter-v1";

inline std::uint64_t splitmix64_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rng_value(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64_finalize(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

// Derives an independent stream seed (per corrupted copy, per fold, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_finalize(seed ^ rng_value(stream, 0));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_at(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(rng_value(seed, counter) >> 11) * 0x1.0p-53;
}

// Stateful convenience wrapper over the counter function.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    double uniform() { return uniform_at(seed_, counter_++); }

    // Box-Muller from two uniforms; no caching so the counter advance per
    // call is fixed at 2.
    double gaussian() {
        const double u1 = 1.0 - uniform(); // (0, 1]: keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform index in [0, n). n must be >= 1.
    std::uint64_t index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace slide
