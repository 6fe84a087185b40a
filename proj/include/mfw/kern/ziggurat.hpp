#pragma once

// Ziggurat sampler for the standard normal (Marsaglia & Tsang layout,
// 128 layers, 64-bit variant). All backends share these tables so scalar
// and SIMD draws are bit-identical.

#include <cstdint>

#include "mfw/kern/philox.hpp"

namespace mfw::kern {

struct ZigTables {
    std::uint64_t kn[128];
    double wn[128];
    double fn[128];
};

// Built once on first use; construction is deterministic.
const ZigTables& zig_tables();

inline constexpr double kZigR = 3.442619855899;

// Runs the acceptance logic for one fetched 64-bit word. Edge layers may
// consume further words from the site stream. Returns false to request a
// fresh attempt word.
bool zig_attempt(std::uint64_t u, SiteStream& s, double& out);

// Reference scalar draw.
double normal_draw(SiteStream& s);

inline double normal_scalar(PhiloxKey key, std::uint32_t channel, std::uint32_t step,
                            std::uint32_t path) {
    SiteStream s{key, channel, step, path, 0, {}};
    return normal_draw(s);
}

} // namespace mfw::kern
