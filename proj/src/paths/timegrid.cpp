#include "mfw/paths/timegrid.hpp"

#include <cmath>

#include "mfw/util/error.hpp"

namespace mfw::paths {

namespace {

long exact_ratio(double num, double den, const char* what) {
    const double q = num / den;
    const long r = std::lround(q);
    if (r < 1 || std::fabs(q - r) > 1e-9 * q)
        throw ConfigError(what, "must be an integer multiple");
    return r;
}

} // namespace

TimeGrid TimeGrid::make(double horizon, double dt, double zeta) {
    if (!(horizon > 0.0) || !(dt > 0.0) || !(zeta > 0.0))
        throw ConfigError("time", "T, dt and zeta must be positive");
    if (dt > zeta || zeta > horizon)
        throw ConfigError("time", "needs dt <= zeta <= T");
    TimeGrid tg;
    tg.horizon = horizon;
    tg.dt = dt;
    tg.zeta = zeta;
    tg.steps_per_block = exact_ratio(zeta, dt, "time.zeta / dt");
    tg.n_steps = exact_ratio(horizon, dt, "time.T / dt");
    return tg;
}

void validate_fast_step(const TimeGrid& tg, const ScaleParams& scales) {
    if (!(scales.epsilon > 0.0) || !(scales.delta > 0.0))
        throw ConfigError("scales", "epsilon and delta must be positive");
    if (tg.dt > scales.delta / 20.0 * (1.0 + 1e-12))
        throw ConfigError("time.dt", "violates the fast-scale contract dt <= delta/20");
}

} // namespace mfw::paths
