#pragma once

#include <cmath>
#include <cstdint>

namespace subgeom {

/// splitmix64 step; used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Deterministic random stream based on xoshiro256** with splitmix64 seeding.
 *
 * Every stream is addressed by a (seed, stream) pair so that parallel workers
 * can draw from independent streams derived from one experiment seed.  The
 * draw sequence depends only on the pair, never on scheduling, which is what
 * makes the OpenMP kernels reproduce the serial reference bit for bit.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed ^ (stream * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL);
        for (auto& word : state_) word = splitmix64(sm);
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint32_t below(std::uint32_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::uint32_t>(r % n);
        }
    }

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        // 1-u1 lies in (0,1], keeping the log argument positive
        double radius = std::sqrt(-2.0 * std::log1p(-u1));
        return radius * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

}  // namespace subgeom
