#pragma once

// Replayable Wiener increments: every draw is a pure function of
// (master_seed, path_index, step, line, mode), so ensembles reproduce
// exactly for any thread count or traversal order.

#include <cstdint>
#include <span>

#include "mfw/kern/backend.hpp"
#include "mfw/kern/ziggurat.hpp"

namespace mfw::paths {

enum class Line : std::uint32_t { Slow = 0, Fast = 1, Frozen = 2 };

inline std::uint32_t channel_of(Line line, std::uint32_t mode) {
    return (static_cast<std::uint32_t>(line) << 16) | mode;
}

struct WienerDriver {
    std::uint64_t master_seed = 0;

    kern::PhiloxKey key() const { return kern::key_from_seed(master_seed); }

    double normal(Line line, std::uint32_t mode, std::uint32_t step,
                  std::uint32_t path) const {
        return kern::normal_scalar(key(), channel_of(line, mode), step, path);
    }

    // z[k] ~ N(0,1) per mode, one step, one path
    void normals(Line line, std::uint32_t step, std::uint32_t path,
                 std::span<double> z) const {
        const kern::PhiloxKey k = key();
        for (std::uint32_t m = 0; m < z.size(); ++m)
            z[m] = kern::normal_scalar(k, channel_of(line, m), step, path);
    }

    // lane-parallel variant: one mode, eight consecutive paths
    void normals8(Line line, std::uint32_t mode, std::uint32_t step, std::uint32_t path0,
                  double* out8) const {
        kern::active().normal8(key(), channel_of(line, mode), step, path0, out8);
    }
};

} // namespace mfw::paths
