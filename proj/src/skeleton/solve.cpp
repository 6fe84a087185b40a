#include "mfw/skeleton/solve.hpp"

#include <cmath>

#include "mfw/field/norms.hpp"
#include "mfw/field/ops.hpp"

namespace mfw::skeleton {

using field::Field;
using models::SlowVariant;

SkeletonTrajectory solve_skeleton(const Field& x0, const Control& control,
                                  const models::ModelSpec& m,
                                  const averaging::FbarBackend& fbar,
                                  const paths::TimeGrid& tg) {
    m.validate();
    control.validate_bound(tg.dt);
    if (control.n_steps() != tg.n_steps)
        throw ConfigError("control", "control mesh must match the time grid");
    if (control.slow_dim() != m.noise_slow.n_modes ||
        control.fast_dim() != m.noise_fast.n_modes)
        throw ConfigError("control", "control dimensions must match the noise blocks");

    const models::SlowImplicit implicit(m, tg.dt);
    std::vector<Field> modes;
    for (int k = 1; k <= m.noise_slow.n_modes; ++k)
        modes.push_back(field::eigenmode(m.slow_grid, k));

    SkeletonTrajectory traj;
    traj.dt = tg.dt;
    traj.states.reserve(static_cast<std::size_t>(tg.n_steps) + 1);
    traj.states.push_back(x0);

    Field x = x0;
    Field drift(m.slow_grid), tmp(m.slow_grid);
    const double blow_radius = 1e6;
    for (long k = 0; k < tg.n_steps; ++k) {
        traj.sup_h_norm_sq = std::max(traj.sup_h_norm_sq,
                                      std::pow(field::norm(x, m.h_kind()), 2));
        traj.v_action_integral +=
            std::pow(models::slow_v_norm(m, x), m.alpha1()) * tg.dt;

        models::slow_explicit_drift(m, x, drift, tmp);
        const Field fb = fbar.fbar(x);
        kern::active().axpy(drift.data(), 1.0, fb.data(), drift.size());

        Field rhs(m.slow_grid);
        kern::active().axpby(rhs.data(), 1.0, x.data(), tg.dt, drift.data(), rhs.size());
        const double mult =
            models::noise_multiplier(m.noise_slow, x, m.h_kind());
        const auto phi_slow = control.slow_at(k);
        for (std::size_t j = 0; j < phi_slow.size(); ++j) {
            const double c = tg.dt * mult * m.noise_slow.mode_coeffs[j] * phi_slow[j];
            if (c != 0.0) kern::active().axpy(rhs.data(), c, modes[j].data(), rhs.size());
        }
        x = implicit.solve(rhs);
        bool finite = true;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!std::isfinite(x[i])) finite = false;
        if (!finite || field::norm(x, m.h_kind()) > blow_radius) {
            traj.blew_up = true;
            traj.blow_step = k;
            return traj;
        }
        traj.states.push_back(x);
    }
    traj.sup_h_norm_sq =
        std::max(traj.sup_h_norm_sq, std::pow(field::norm(x, m.h_kind()), 2));
    return traj;
}

EnergyReport energy_report(const SkeletonTrajectory& traj, const Control& control,
                           const models::ModelSpec& m, const Field& x0,
                           double envelope_constant) {
    EnergyReport rep;
    rep.sup_h_norm_sq = traj.sup_h_norm_sq;
    rep.v_action_integral = traj.v_action_integral;
    rep.control_energy = control.energy(traj.dt);
    const double x0h = field::norm(x0, m.h_kind());
    rep.envelope = envelope_constant * (1.0 + x0h * x0h) * std::exp(rep.control_energy);
    rep.finite = std::isfinite(rep.sup_h_norm_sq) && std::isfinite(rep.v_action_integral) &&
                 !traj.blew_up;
    rep.within_envelope =
        rep.finite && rep.sup_h_norm_sq <= rep.envelope &&
        rep.v_action_integral <= rep.envelope;
    return rep;
}

} // namespace mfw::skeleton
