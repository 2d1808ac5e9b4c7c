#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace e1lab {

/// SplitMix64. Fixed constants so that corpora are reproducible from any language.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal by Box-Muller, one draw per call (no cached pair).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 0x1.0p-60) u1 = 0x1.0p-60;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    /// Derive an independent stream for sub-task `k`.
    SplitMix64 fork(std::uint64_t k) const {
        SplitMix64 tmp(state_ ^ (0xD1B54A32D192ED03ULL * (k + 1)));
        return SplitMix64(tmp.next());
    }

private:
    std::uint64_t state_;
};

}  // namespace e1lab
