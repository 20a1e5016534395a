// SPDX-License-Identifier: MIT
//
// Internal deterministic RNG. The standard library distributions are
// implementation-defined, so artifacts seeded through them would not be
// reproducible across toolchains; this generator pins the exact stream.
#ifndef SOILRF_SRC_RNG_HPP
#define SOILRF_SRC_RNG_HPP

#include <cmath>
#include <cstdint>

#include "soilrf/util.hpp"

namespace soilrf {

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform in (0, b].
    double uniform_open_lo(double b) { return b * (1.0 - uniform01()); }

    // Standard normal via Box-Muller; caches the second deviate.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01(); // (0, 1], keeps log finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace soilrf

#endif
