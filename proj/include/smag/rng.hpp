// Counter-based random number generation (Philox4x32-10).
// Every draw is a pure function of (key, counter), so ensemble runs get
// reproducible, non-overlapping streams without shared state: we key by the
// master seed and index the counter by (step, substream, domain, path).
//
// Salmon et al., SC 2011. Parallel random numbers: as easy as 1, 2, 3.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace smag {

namespace detail {

inline constexpr uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<uint32_t, 4>& ctr, const std::array<uint32_t, 2>& key) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM4x32A) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM4x32B) * ctr[2];
    const uint32_t lo0 = static_cast<uint32_t>(p0), hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1), hi1 = static_cast<uint32_t>(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

// One 128-bit Philox4x32-10 block.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(ctr, key);
        if (round < 9) {
            key[0] += detail::kPhiloxW32A;
            key[1] += detail::kPhiloxW32B;
        }
    }
    return ctr;
}

// Stream domains keep unrelated consumers of the same master seed disjoint.
enum class RngDomain : uint32_t {
    brownian = 0,       // Wiener increments, substream = noise-mode index
    initial_state = 1,  // random initial vorticity coefficients
    scatter = 2,        // quadrature sample points, shuffles, misc
};

// One standard normal deviate, Box-Muller on the first two words of a block.
// The cos branch alone is used; reproducibility matters more than throughput.
inline double normal_draw(uint64_t master_seed, uint32_t path, RngDomain domain,
                          uint32_t substream, uint32_t step) {
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(master_seed),
                                         static_cast<uint32_t>(master_seed >> 32)};
    const std::array<uint32_t, 4> ctr = {step, substream, static_cast<uint32_t>(domain), path};
    const auto block = philox4x32(ctr, key);
    const double u1 = (static_cast<double>(block[0]) + 1.0) * 0x1p-32;  // (0,1]
    const double u2 = (static_cast<double>(block[1]) + 0.5) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Uniform in [0,1) from one block.
inline double uniform_draw(uint64_t master_seed, uint32_t path, RngDomain domain,
                           uint32_t substream, uint32_t step) {
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(master_seed),
                                         static_cast<uint32_t>(master_seed >> 32)};
    const std::array<uint32_t, 4> ctr = {step, substream, static_cast<uint32_t>(domain), path};
    return static_cast<double>(philox4x32(ctr, key)[0]) * 0x1p-32;
}

}  // namespace smag
