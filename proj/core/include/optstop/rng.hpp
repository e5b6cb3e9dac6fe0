#pragma once

#include <cmath>
#include <cstdint>

namespace optstop {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ with hand-rolled variate transforms. Results depend only on
/// (seed, draw order), not on the standard library, so reports are
/// reproducible bit for bit from the seed recorded in them.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    /// Stream seed for batch `stream` of root seed `root`. Batches are
    /// reduced in index order, so results do not depend on scheduling.
    static std::uint64_t deriveStream(std::uint64_t root, std::uint64_t stream) {
        std::uint64_t sm = root + 0x9E3779B97F4A7C15ull * (stream + 1);
        return splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        hasSpare_ = true;
        return u * factor;
    }

    /// Exponential with the given rate (> 0).
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    /// Poisson count by multiplicative thinning; large means are split so the
    /// inner loop stays short.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        long total = 0;
        while (mean > 32.0) {
            total += poisson(mean / 2.0);
            mean /= 2.0;
        }
        const double limit = std::exp(-mean);
        long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= u01();
        } while (p > limit);
        return total + k - 1;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

} // namespace optstop
