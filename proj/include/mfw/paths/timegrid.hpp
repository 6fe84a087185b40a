#pragma once

#include <cstdint>

namespace mfw::paths {

struct ScaleParams {
    double epsilon = 1.0;
    double delta = 1.0;
    double ratio() const { return delta / epsilon; }
};

// Uniform time mesh on [0, T] with a Khasminskii block length zeta that is
// an exact multiple of dt.
struct TimeGrid {
    double horizon = 1.0;
    double dt = 1e-2;
    double zeta = 1e-1;
    long n_steps = 100;
    long steps_per_block = 10;

    double time_of(long k) const { return dt * static_cast<double>(k); }
    long block_of(long k) const { return k / steps_per_block; }
    long block_start_step(long k) const { return block_of(k) * steps_per_block; }

    static TimeGrid make(double horizon, double dt, double zeta);
};

// dt <= delta/20 resolves the fast relaxation scale; violation is a
// configuration error surfaced before any stepping.
void validate_fast_step(const TimeGrid& tg, const ScaleParams& scales);

} // namespace mfw::paths
