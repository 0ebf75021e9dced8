#pragma once

#include <cmath>
#include <cstdint>

#include "nsreg/matrix.hpp"

namespace nsreg {

/// Deterministic splitmix64 generator with a Box-Muller gaussian.
/// Self-contained so experiment streams are reproducible bit-for-bit and can
/// be derived per (seed, delta_index, trial_index) without shared state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard gaussian via Box-Muller (no cached spare).
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Derives an independent stream key from up to three indices.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
        Rng r(a * 0x9e3779b97f4a7c15ULL + 0x5851f42d4c957f2dULL);
        std::uint64_t h = r.next_u64();
        h ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        Rng r2(h);
        h = r2.next_u64();
        h ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        Rng r3(h);
        return r3.next_u64();
    }

private:
    std::uint64_t state_;
};

inline Vector gaussian_vector(Rng& rng, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}

}  // namespace nsreg
