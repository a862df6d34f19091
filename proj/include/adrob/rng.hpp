#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace adrob {

/// splitmix64 step; used both as a generator seeder and to derive
/// independent sub-seeds from (seed, coordinate) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4a9cab9398367ULL ^ 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a grid cell / chunk. Parallel consumers must
/// each own a generator built from their own sub-seed; generators are never
/// shared across threads.
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ (a * 0x9e3779b97f4a7c15ULL)) ^ b);
}

/// mt19937_64 wrapped with hand-rolled variate transforms so that the byte
/// stream is identical across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    /// Uniform on (0, 1); never returns exactly 0.
    double uniform() {
        // 53-bit mantissa; add half an ulp to exclude zero.
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential() { return -std::log(uniform()); }

    /// Standard normal via Box-Muller (one value per call; the pair's second
    /// member is cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(2.0 * exponential());
        double t = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t bits() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace adrob
