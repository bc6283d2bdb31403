#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace riesz {

// Philox4x64-10 counter-based generator.  Streams are keyed by
// (seed, purpose) and indexed by an arbitrary 4-word counter, so noise is
// reproducible regardless of thread scheduling or evaluation order.
namespace philox {

inline void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
    __uint128_t p = static_cast<__uint128_t>(a) * b;
    hi = static_cast<uint64_t>(p >> 64);
    lo = static_cast<uint64_t>(p);
}

inline std::array<uint64_t, 4> block(std::array<uint64_t, 4> ctr,
                                     std::array<uint64_t, 2> key) {
    constexpr uint64_t M0 = 0xD2E7470EE14C6C93ULL;
    constexpr uint64_t M1 = 0xCA5A826395121157ULL;
    constexpr uint64_t W0 = 0x9E3779B97F4A7C15ULL;
    constexpr uint64_t W1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
        uint64_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline double u01(uint64_t x) {  // strictly inside (0,1)
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Four uniforms in (0,1) from one block.
inline std::array<double, 4> uniform4(uint64_t seed, uint64_t purpose,
                                      std::array<uint64_t, 4> ctr) {
    auto b = block(ctr, {seed, purpose});
    return {u01(b[0]), u01(b[1]), u01(b[2]), u01(b[3])};
}

// Four standard normals (Box-Muller) from one block.
inline std::array<double, 4> normal4(uint64_t seed, uint64_t purpose,
                                     std::array<uint64_t, 4> ctr) {
    auto u = uniform4(seed, purpose, ctr);
    constexpr double two_pi = 6.28318530717958647692528676655900577;
    const double r0 = std::sqrt(-2.0 * std::log(u[0]));
    const double r1 = std::sqrt(-2.0 * std::log(u[2]));
    return {r0 * std::cos(two_pi * u[1]), r0 * std::sin(two_pi * u[1]),
            r1 * std::cos(two_pi * u[3]), r1 * std::sin(two_pi * u[3])};
}

// Stream purposes; keep values stable, they are part of the output contract.
enum purpose : uint64_t {
    kNoise = 1,     // Brownian increments: ctr = (0, particle, step, replica)
    kInit = 2,      // initial sampling:    ctr = (attempt, particle, 0, replica)
    kConfigGen = 3  // synthetic test configurations
};

}  // namespace philox
}  // namespace riesz
