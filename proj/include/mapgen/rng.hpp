#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace mapgen {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for instance `instance_index` of evaluation `map_id` in a run. Both algorithms of a
/// two-algorithm comparison call this with the same arguments and therefore see the same instances.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t map_id,
                                    std::uint64_t instance_index) noexcept {
    std::uint64_t s = splitmix64(run_seed);
    s = splitmix64(s ^ map_id);
    return splitmix64(s ^ (instance_index + 0x632BE59BD9B4E019ULL));
}

/// Uniform integer in [0, n). Unlike std::uniform_int_distribution the result is specified
/// exactly, so sequences match across standard library implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal deviates by the Marsaglia polar method. Written out instead of using
/// std::normal_distribution so that sample sequences do not depend on the standard library.
class NormalSampler {
public:
    double operator()(std::mt19937_64& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform_unit(rng) - 1.0;
            v = 2.0 * uniform_unit(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    bool has_spare() const { return has_spare_; }
    double spare() const { return spare_; }
    void restore(bool has_spare, double spare) {
        has_spare_ = has_spare;
        spare_ = spare;
    }

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mapgen
