#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A block is a pure function of (counter, key); streams never carry state.

#include <cstdint>

namespace mfw::kern {

inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

struct PhiloxKey {
    std::uint32_t k0 = 0;
    std::uint32_t k1 = 0;
};

inline PhiloxKey key_from_seed(std::uint64_t seed) {
    return PhiloxKey{static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32)};
}

struct PhiloxCtr {
    std::uint32_t c0 = 0; // sub-counter within a draw site
    std::uint32_t c1 = 0; // channel (line/mode)
    std::uint32_t c2 = 0; // step
    std::uint32_t c3 = 0; // path
};

struct PhiloxBlock {
    std::uint32_t w[4];
    std::uint64_t lo64() const {
        return static_cast<std::uint64_t>(w[0]) | (static_cast<std::uint64_t>(w[1]) << 32);
    }
    std::uint64_t hi64() const {
        return static_cast<std::uint64_t>(w[2]) | (static_cast<std::uint64_t>(w[3]) << 32);
    }
};

inline PhiloxBlock philox4x32(PhiloxCtr ctr, PhiloxKey key) {
    std::uint32_t c0 = ctr.c0, c1 = ctr.c1, c2 = ctr.c2, c3 = ctr.c3;
    std::uint32_t k0 = key.k0, k1 = key.k1;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * c2;
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        if (round < 9) {
            k0 += kPhiloxW32A;
            k1 += kPhiloxW32B;
        }
    }
    return PhiloxBlock{{c0, c1, c2, c3}};
}

// One draw site (key, channel, step, path) owns a private substream of
// 64-bit words indexed by the attempt counter.
struct SiteStream {
    PhiloxKey key;
    std::uint32_t channel = 0;
    std::uint32_t step = 0;
    std::uint32_t path = 0;
    std::uint32_t attempt = 0;
    PhiloxBlock cached{};

    std::uint64_t next_u64() {
        std::uint64_t out;
        if ((attempt & 1u) == 0) {
            cached = philox4x32(PhiloxCtr{attempt >> 1, channel, step, path}, key);
            out = cached.lo64();
        } else {
            out = cached.hi64();
        }
        ++attempt;
        return out;
    }

    double next_uniform() {
        std::uint64_t u = next_u64() >> 11;
        if (u == 0) u = 1; // keep log() finite in rejection loops
        return static_cast<double>(u) * 0x1.0p-53;
    }
};

} // namespace mfw::kern
