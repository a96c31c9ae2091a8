#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cashflow {

/// Mixes a 64-bit value with the splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a set of tags
/// (company id, fold index, purpose code...). Same inputs, same seed, so
/// results never depend on scheduling or processing order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t t : tags) {
        s = splitmix64(s ^ splitmix64(t));
    }
    return s;
}

/// Unbiased-enough index draw in [0, n) via multiply-shift; avoids the
/// implementation-defined behavior of std::uniform_int_distribution.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n)) >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal variates by the Marsaglia polar method on top of
/// mt19937_64. Both pieces are pinned algorithms, so a fixed seed gives the
/// same stream on every platform, unlike std::normal_distribution.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform_unit(rng_) - 1.0;
            v = 2.0 * uniform_unit(rng_) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace cashflow
