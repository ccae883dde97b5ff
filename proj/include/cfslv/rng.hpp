#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace cfslv {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each draw is
// a pure function of (key, counter), so particle simulations can be sharded
// across threads in any order and still produce bit-identical streams.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// Uniform in (0,1): 53-bit mantissa from two 32-bit words, offset by half an ulp
// so that log() of the result is always finite.
inline double uniform_from_bits(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

// Stateless Gaussian stream addressed by (particle, step, channel-pair).
// One Philox block supplies a Box-Muller pair.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                                   static_cast<std::uint32_t>(seed >> 32)} {}

    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    }

    // Two standard normals for (particle, step, slot).
    std::array<double, 2> normal_pair(std::uint64_t particle, std::uint64_t step,
                                      std::uint32_t slot) const {
        const auto r = Philox4x32::block(
            {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
             static_cast<std::uint32_t>(step), slot},
            key_);
        const double u1 = uniform_from_bits(r[0], r[1]);
        const double u2 = uniform_from_bits(r[2], r[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
#if defined(__GLIBC__)
        double s, c;
        ::sincos(angle, &s, &c);
        return {radius * c, radius * s};
#else
        return {radius * std::cos(angle), radius * std::sin(angle)};
#endif
    }

    // One standard normal (the cosine branch only; cheaper when the second
    // draw of the pair is not needed).
    double normal_single(std::uint64_t particle, std::uint64_t step, std::uint32_t slot) const {
        const auto r = Philox4x32::block(
            {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
             static_cast<std::uint32_t>(step), slot},
            key_);
        const double u1 = uniform_from_bits(r[0], r[1]);
        const double u2 = uniform_from_bits(r[2], r[3]);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    double uniform(std::uint64_t particle, std::uint64_t step, std::uint32_t slot) const {
        const auto r = Philox4x32::block(
            {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
             static_cast<std::uint32_t>(step), slot},
            key_);
        return uniform_from_bits(r[0], r[1]);
    }

private:
    std::array<std::uint32_t, 2> key_;
};

// Derives a subsystem seed from the master seed and a label (FNV-1a mix).
// Keeps every random stream in the pipeline a pure function of --seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (const char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

}  // namespace cfslv
