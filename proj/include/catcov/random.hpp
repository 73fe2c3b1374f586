#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace catcov {

/// Seeded generator whose streams are identical across standard libraries.
///
/// `std::mt19937_64` output is fully specified by the standard, but the
/// distribution adaptors are not, so uniform and normal draws are mapped by
/// hand here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). `n` must be positive.
    std::uint64_t index(std::uint64_t n) {
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal via Box-Muller (one draw per call, no caching).
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace catcov
