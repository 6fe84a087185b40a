#pragma once

// Exact mode-1 reduction of the coupled system. When the slow operator is
// linear-diagonal, both couplings are affine with zero offset, the fast
// reaction is linear and each noise block drives mode 1 only, the span of
// the first eigenmode is invariant and the dynamics collapse to a scalar
// pair per path. The tail estimator runs this reduction eight paths per
// SIMD group.

#include <cstdint>
#include <vector>

#include "mfw/models/specs.hpp"
#include "mfw/paths/driver.hpp"
#include "mfw/paths/timegrid.hpp"

namespace mfw::paths {

struct Mode1Reduction {
    double lam_slow = 0.0;
    double lam_fast = 0.0;
    double a = 0.0; // slow diffusivity
    double f_gain_x = 0.0, f_gain_y = 0.0;
    double g_gain_x = 0.0, g_gain_y = 0.0;
    double c1 = 0.0;
    double b1 = 0.0, b2 = 0.0;

    // throws ConfigError when the model is not mode-1 reducible
    static Mode1Reduction from(const models::ModelSpec& m);
};

struct ReducedTerminal {
    std::uint64_t hits = 0;     // terminal slow coefficient > threshold
    std::uint64_t blowups = 0;
    double sum = 0.0;           // sum of terminal slow coefficients
    double sum_sq = 0.0;
    double sum_sup_sq = 0.0;    // sum over paths of sup_t x_t^2
};

// Runs paths [path0, path0 + count) and accumulates terminal statistics in
// path order. Callers combine per-block results in block order so ensemble
// statistics do not depend on the thread count.
ReducedTerminal reduced_tail_block(const Mode1Reduction& red, const ScaleParams& scales,
                                   const TimeGrid& tg, const WienerDriver& driver,
                                   double x0, double y0, double threshold,
                                   std::uint32_t path0, std::uint32_t count);

// Single-path trajectory of the reduced pair, for equivalence tests
// against the field stepper.
void reduced_single_path(const Mode1Reduction& red, const ScaleParams& scales,
                         const TimeGrid& tg, const WienerDriver& driver, double x0,
                         double y0, std::uint32_t path, std::vector<double>& x_out,
                         std::vector<double>& y_out);

} // namespace mfw::paths
