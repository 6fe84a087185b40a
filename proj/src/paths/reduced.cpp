#include "mfw/paths/reduced.hpp"

#include <cmath>

#include "mfw/field/grid.hpp"
#include "mfw/util/error.hpp"

namespace mfw::paths {

Mode1Reduction Mode1Reduction::from(const models::ModelSpec& m) {
    m.validate();
    const char* where = "reduction";
    if (m.slow.variant != models::SlowVariant::LinearDiagnostic)
        throw ConfigError(where, "needs the linear diagnostic slow operator");
    if (!m.f.is_affine() || m.f.f0_const != 0.0)
        throw ConfigError(where, "needs an affine coupling f with zero offset");
    if (!m.fast.g.is_affine() || m.fast.g.f0_const != 0.0)
        throw ConfigError(where, "needs an affine forcing g with zero offset");
    if (m.fast.c2 != 0.0) throw ConfigError(where, "needs a linear fast reaction (c2 = 0)");
    for (const models::NoiseSpec* ns : {&m.noise_slow, &m.noise_fast}) {
        if (ns->n_modes != 1 || ns->dependence != models::NoiseDependence::Additive)
            throw ConfigError(where, "needs additive single-mode noise blocks");
    }
    Mode1Reduction r;
    r.lam_slow = field::laplace_eigenvalue(m.slow_grid, 1);
    r.lam_fast = field::laplace_eigenvalue(m.fast_grid, 1);
    r.a = m.slow.a;
    r.f_gain_x = m.f.gain_x;
    r.f_gain_y = m.f.gain_y;
    r.g_gain_x = m.fast.g.gain_x;
    r.g_gain_y = m.fast.g.gain_y;
    r.c1 = m.fast.c1;
    r.b1 = m.noise_slow.mode_coeffs[0];
    r.b2 = m.noise_fast.mode_coeffs[0];
    return r;
}

namespace {

struct StepCoeffs {
    double dt;
    double slow_div;   // 1 + dt * a * lam_slow
    double fast_div;   // 1 + (dt/delta) * lam_fast
    double dtd;        // dt / delta
    double slow_noise; // sqrt(eps * dt) * b1
    double fast_noise; // sqrt(dt / delta) * b2
    double blow2;      // blow radius squared (on coefficients)

    StepCoeffs(const Mode1Reduction& r, const ScaleParams& s, const TimeGrid& tg) {
        dt = tg.dt;
        dtd = dt / s.delta;
        slow_div = 1.0 + dt * r.a * r.lam_slow;
        fast_div = 1.0 + dtd * r.lam_fast;
        slow_noise = std::sqrt(s.epsilon * dt) * r.b1;
        fast_noise = std::sqrt(dtd) * r.b2;
        blow2 = 1e12;
    }
};

} // namespace

ReducedTerminal reduced_tail_block(const Mode1Reduction& red, const ScaleParams& scales,
                                   const TimeGrid& tg, const WienerDriver& driver,
                                   double x0, double y0, double threshold,
                                   std::uint32_t path0, std::uint32_t count) {
    const StepCoeffs c(red, scales, tg);
    ReducedTerminal acc;
    double z1[8], z2[8], x[8], y[8], sup2[8];
    bool blown[8];
    for (std::uint32_t g = 0; g < count; g += 8) {
        const std::uint32_t base = path0 + g;
        const std::uint32_t lanes = count - g < 8 ? count - g : 8;
        for (int l = 0; l < 8; ++l) {
            x[l] = x0;
            y[l] = y0;
            sup2[l] = x0 * x0;
            blown[l] = false;
        }
        for (long k = 0; k < tg.n_steps; ++k) {
            driver.normals8(Line::Slow, 0, static_cast<std::uint32_t>(k), base, z1);
            driver.normals8(Line::Fast, 0, static_cast<std::uint32_t>(k), base, z2);
            for (int l = 0; l < 8; ++l) {
                const double xv = x[l], yv = y[l];
                const double xn =
                    (xv + c.dt * (red.f_gain_x * xv + red.f_gain_y * yv) +
                     c.slow_noise * z1[l]) /
                    c.slow_div;
                const double yn =
                    (yv + c.dtd * ((red.c1 + red.g_gain_y) * yv + red.g_gain_x * xv) +
                     c.fast_noise * z2[l]) /
                    c.fast_div;
                x[l] = xn;
                y[l] = yn;
                if (xn * xn > sup2[l]) sup2[l] = xn * xn;
                if (!(xn * xn < c.blow2) || !(yn * yn < c.blow2)) blown[l] = true;
            }
        }
        for (std::uint32_t l = 0; l < lanes; ++l) {
            if (blown[l]) {
                ++acc.blowups;
                continue;
            }
            if (x[l] > threshold) ++acc.hits;
            acc.sum += x[l];
            acc.sum_sq += x[l] * x[l];
            acc.sum_sup_sq += sup2[l];
        }
    }
    return acc;
}

void reduced_single_path(const Mode1Reduction& red, const ScaleParams& scales,
                         const TimeGrid& tg, const WienerDriver& driver, double x0,
                         double y0, std::uint32_t path, std::vector<double>& x_out,
                         std::vector<double>& y_out) {
    const StepCoeffs c(red, scales, tg);
    x_out.assign(static_cast<std::size_t>(tg.n_steps) + 1, 0.0);
    y_out.assign(static_cast<std::size_t>(tg.n_steps) + 1, 0.0);
    double x = x0, y = y0;
    x_out[0] = x;
    y_out[0] = y;
    for (long k = 0; k < tg.n_steps; ++k) {
        const double z1 = driver.normal(Line::Slow, 0, static_cast<std::uint32_t>(k), path);
        const double z2 = driver.normal(Line::Fast, 0, static_cast<std::uint32_t>(k), path);
        const double xn =
            (x + c.dt * (red.f_gain_x * x + red.f_gain_y * y) + c.slow_noise * z1) /
            c.slow_div;
        const double yn =
            (y + c.dtd * ((red.c1 + red.g_gain_y) * y + red.g_gain_x * x) +
             c.fast_noise * z2) /
            c.fast_div;
        x = xn;
        y = yn;
        x_out[static_cast<std::size_t>(k) + 1] = x;
        y_out[static_cast<std::size_t>(k) + 1] = y;
    }
}

} // namespace mfw::paths
