#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based Philox4x32-10 stream (Salmon et al., SC 2011). Draws are keyed
// by (seed, salt, path, step), so path order and worker count never change the
// sample stream.

namespace fxlv::rng {

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline double to_unit(std::uint32_t x) {
    // (0, 1), never exactly 0 or 1
    return (static_cast<double>(x) + 0.5) * 2.3283064365386963e-10;
}

}  // namespace detail

// Four standard normals for a given (path, step) cell. `salt` separates
// independent uses of the same seed (e.g. distinct calibration horizons).
inline std::array<double, 4> normal4(std::uint64_t seed, std::uint32_t salt,
                                     std::uint64_t path, std::uint64_t step) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
        static_cast<std::uint32_t>(step), salt};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const auto r = detail::philox4x32_10(ctr, key);
    const double u0 = detail::to_unit(r[0]);
    const double u1 = detail::to_unit(r[1]);
    const double u2 = detail::to_unit(r[2]);
    const double u3 = detail::to_unit(r[3]);
    const double r0 = std::sqrt(-2.0 * std::log(u0));
    const double r1 = std::sqrt(-2.0 * std::log(u2));
    const double a0 = 2.0 * M_PI * u1;
    const double a1 = 2.0 * M_PI * u3;
    return {r0 * std::cos(a0), r0 * std::sin(a0), r1 * std::cos(a1), r1 * std::sin(a1)};
}

}  // namespace fxlv::rng
