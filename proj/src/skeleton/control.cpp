#include "mfw/skeleton/control.hpp"

#include "mfw/util/error.hpp"

namespace mfw::skeleton {

double Control::energy(double dt) const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s * dt;
}

void Control::validate_bound(double dt) const {
    if (!bound_M) return;
    const double e = energy(dt);
    if (e > *bound_M * (1.0 + 1e-12))
        throw ConfigError("control.bound_M", "control energy exceeds the S_M bound");
}

} // namespace mfw::skeleton
