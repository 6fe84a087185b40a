#include "mfw/paths/stepper.hpp"

#include <cmath>

#include "mfw/field/norms.hpp"
#include "mfw/util/error.hpp"

namespace mfw::paths {

using field::Field;
using models::ModelSpec;
using models::SlowVariant;

namespace {

std::vector<Field> build_modes(const field::Grid& g, int n_modes) {
    std::vector<Field> modes;
    modes.reserve(static_cast<std::size_t>(n_modes));
    for (int k = 1; k <= n_modes; ++k) modes.push_back(field::eigenmode(g, k));
    return modes;
}

bool finite_below(const Field& f, const field::NormKind kind, double radius) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) return false;
    return field::norm(f, kind) <= radius;
}

} // namespace

CoupledSystem::CoupledSystem(const ModelSpec& m, ScaleParams scales, const TimeGrid& tg,
                             const WienerDriver& driver, SimOptions opts)
    : model_(m), scales_(scales), tg_(tg), driver_(driver), opts_(opts),
      fast_rhs_(m.fast_grid), slow_rhs_(m.slow_grid), slow_tmp_(m.slow_grid) {
    m.validate();
    validate_fast_step(tg, scales);
    slow_implicit_ = models::SlowImplicit(m, tg.dt);
    fast_solver_ = field::ShiftedLaplaceSolver(m.fast_grid, tg.dt / scales.delta);
    slow_modes_ = build_modes(m.slow_grid, m.noise_slow.n_modes);
    fast_modes_ = build_modes(m.fast_grid, m.noise_fast.n_modes);
    z1_.resize(static_cast<std::size_t>(m.noise_slow.n_modes));
    z2_.resize(static_cast<std::size_t>(m.noise_fast.n_modes));
}

void CoupledSystem::explicit_slow_drift(const Field& x, Field& out) const {
    models::slow_explicit_drift(model_, x, out, slow_tmp_);
}

Field CoupledSystem::solve_slow_implicit(const Field& rhs) const {
    return slow_implicit_.solve(rhs);
}

bool CoupledSystem::fast_line_step(const Field& x_input, Field& y, long k,
                                   std::uint32_t path, const skeleton::Control* phi) {
    const double dt = tg_.dt;
    const double delta = scales_.delta;
    driver_.normals(Line::Fast, static_cast<std::uint32_t>(k), path, z2_);
    const double mult = models::noise_multiplier(model_.noise_fast, y, field::NormKind::l2());

    Field& rhs = fast_rhs_;
    kern::active().cubic_reaction(rhs.data(), model_.fast.c1, model_.fast.c2, y.data(),
                                  y.size());
    const Field g = models::coupling_apply(model_.fast.g, x_input, y, model_.fast_grid);
    kern::active().axpy(rhs.data(), 1.0, g.data(), rhs.size());
    // y + (dt/delta) * explicit drift
    kern::active().axpby(rhs.data(), dt / delta, rhs.data(), 1.0, y.data(), rhs.size());

    const double noise_scale = std::sqrt(dt) / std::sqrt(delta) * mult;
    const double ctrl_scale = phi ? dt / std::sqrt(delta * scales_.epsilon) * mult : 0.0;
    for (std::size_t m = 0; m < z2_.size(); ++m) {
        double c = noise_scale * model_.noise_fast.mode_coeffs[m] * z2_[m];
        if (phi) c += ctrl_scale * model_.noise_fast.mode_coeffs[m] * phi->fast_at(k)[m];
        if (c != 0.0) kern::active().axpy(rhs.data(), c, fast_modes_[m].data(), rhs.size());
    }
    Field ynew(model_.fast_grid);
    fast_solver_.solve(rhs.values(), ynew.values());
    if (!finite_below(ynew, field::NormKind::l2(), opts_.blow_radius)) return false;
    y = std::move(ynew);
    return true;
}

bool CoupledSystem::step(Field& x, Field& y, long k, std::uint32_t path,
                         const skeleton::Control* phi) {
    const double dt = tg_.dt;
    driver_.normals(Line::Slow, static_cast<std::uint32_t>(k), path, z1_);
    const double mult =
        models::noise_multiplier(model_.noise_slow, x, model_.h_kind());

    Field& rhs = slow_rhs_;
    explicit_slow_drift(x, rhs);
    const Field coup = models::coupling_apply(model_.f, x, y, model_.slow_grid);
    kern::active().axpy(rhs.data(), 1.0, coup.data(), rhs.size());
    kern::active().axpby(rhs.data(), dt, rhs.data(), 1.0, x.data(), rhs.size());

    const double noise_scale = std::sqrt(scales_.epsilon) * std::sqrt(dt) * mult;
    const double ctrl_scale = phi ? dt * mult : 0.0;
    for (std::size_t m = 0; m < z1_.size(); ++m) {
        double c = noise_scale * model_.noise_slow.mode_coeffs[m] * z1_[m];
        if (phi) c += ctrl_scale * model_.noise_slow.mode_coeffs[m] * phi->slow_at(k)[m];
        if (c != 0.0) kern::active().axpy(rhs.data(), c, slow_modes_[m].data(), rhs.size());
    }
    Field xnew = solve_slow_implicit(rhs);
    if (!finite_below(xnew, model_.h_kind(), opts_.blow_radius)) return false;

    if (!fast_line_step(x, y, k, path, phi)) return false;
    x = std::move(xnew);
    return true;
}

RunStatus CoupledSystem::run(Field& x, Field& y, std::uint32_t path,
                             const skeleton::Control* phi, const Observer* observer) {
    for (long k = 0; k < tg_.n_steps; ++k) {
        if (!step(x, y, k, path, phi)) return {true, k};
        if (observer) (*observer)(k, x, y);
    }
    return {};
}

FrozenSystem::FrozenSystem(const ModelSpec& m, Field x_frozen, double dt,
                           const WienerDriver& driver, SimOptions opts)
    : model_(m), x_(std::move(x_frozen)), dt_(dt), driver_(driver), opts_(opts),
      solver_(m.fast_grid, dt), modes_(build_modes(m.fast_grid, m.noise_fast.n_modes)),
      z_(static_cast<std::size_t>(m.noise_fast.n_modes)), scratch_(m.fast_grid) {
    m.validate();
    if (!(dt > 0.0)) throw ConfigError("frozen.dt", "must be positive");
}

bool FrozenSystem::step(Field& y, long k, std::uint32_t path) {
    driver_.normals(Line::Frozen, static_cast<std::uint32_t>(k), path, z_);
    const double mult =
        models::noise_multiplier(model_.noise_fast, y, field::NormKind::l2());

    Field& rhs = scratch_;
    kern::active().cubic_reaction(rhs.data(), model_.fast.c1, model_.fast.c2, y.data(),
                                  y.size());
    const Field g = models::coupling_apply(model_.fast.g, x_, y, model_.fast_grid);
    kern::active().axpy(rhs.data(), 1.0, g.data(), rhs.size());
    kern::active().axpby(rhs.data(), dt_, rhs.data(), 1.0, y.data(), rhs.size());

    const double noise_scale = std::sqrt(dt_) * mult;
    for (std::size_t m = 0; m < z_.size(); ++m) {
        const double c = noise_scale * model_.noise_fast.mode_coeffs[m] * z_[m];
        if (c != 0.0) kern::active().axpy(rhs.data(), c, modes_[m].data(), rhs.size());
    }
    Field ynew(model_.fast_grid);
    solver_.solve(rhs.values(), ynew.values());
    if (!finite_below(ynew, field::NormKind::l2(), opts_.blow_radius)) return false;
    y = std::move(ynew);
    return true;
}

RunStatus FrozenSystem::run(Field& y, long n_steps, std::uint32_t path,
                            const Observer* observer) {
    for (long k = 0; k < n_steps; ++k) {
        if (!step(y, k, path)) return {true, k};
        if (observer) (*observer)(k, y);
    }
    return {};
}

AuxiliarySystem::AuxiliarySystem(const ModelSpec& m, ScaleParams scales,
                                 const TimeGrid& tg, const WienerDriver& driver,
                                 std::vector<Field> slow_snapshots, SimOptions opts)
    : inner_(m, scales, tg, driver, opts), snapshots_(std::move(slow_snapshots)) {
    const long blocks = (tg.n_steps + tg.steps_per_block - 1) / tg.steps_per_block;
    if (static_cast<long>(snapshots_.size()) < blocks)
        throw ConfigError("auxiliary.snapshots", "must cover every zeta block of [0, T]");
}

bool AuxiliarySystem::step(Field& y, long k, std::uint32_t path) {
    const Field& xs = snapshots_[static_cast<std::size_t>(inner_.tg_.block_of(k))];
    return inner_.fast_line_step(xs, y, k, path, nullptr);
}

Trajectory simulate_coupled(const ModelSpec& m, ScaleParams scales, const TimeGrid& tg,
                            const WienerDriver& driver, const Field& x0, const Field& y0,
                            std::uint32_t path, long record_stride,
                            const skeleton::Control* phi) {
    CoupledSystem sys(m, scales, tg, driver);
    Trajectory traj;
    Field x = x0, y = y0;
    traj.t.push_back(0.0);
    traj.x.push_back(x);
    traj.y.push_back(y);
    for (long k = 0; k < tg.n_steps; ++k) {
        if (!sys.step(x, y, k, path, phi)) {
            traj.status = {true, k};
            return traj;
        }
        if ((k + 1) % record_stride == 0 || k + 1 == tg.n_steps) {
            traj.t.push_back(tg.time_of(k + 1));
            traj.x.push_back(x);
            traj.y.push_back(y);
        }
    }
    return traj;
}

Trajectory simulate_frozen(const ModelSpec& m, const Field& x, const Field& y0,
                           double horizon, double dt, const WienerDriver& driver,
                           std::uint32_t path, long record_stride) {
    FrozenSystem sys(m, x, dt, driver);
    Trajectory traj;
    Field y = y0;
    const long n_steps = std::lround(horizon / dt);
    traj.t.push_back(0.0);
    traj.y.push_back(y);
    for (long k = 0; k < n_steps; ++k) {
        if (!sys.step(y, k, path)) {
            traj.status = {true, k};
            return traj;
        }
        if ((k + 1) % record_stride == 0 || k + 1 == n_steps) {
            traj.t.push_back(dt * static_cast<double>(k + 1));
            traj.y.push_back(y);
        }
    }
    return traj;
}

Trajectory simulate_auxiliary(const ModelSpec& m, ScaleParams scales, const TimeGrid& tg,
                              const WienerDriver& driver,
                              const std::vector<Field>& slow_snapshots, const Field& y0,
                              std::uint32_t path, long record_stride) {
    AuxiliarySystem sys(m, scales, tg, driver, slow_snapshots);
    Trajectory traj;
    Field y = y0;
    traj.t.push_back(0.0);
    traj.y.push_back(y);
    for (long k = 0; k < tg.n_steps; ++k) {
        if (!sys.step(y, k, path)) {
            traj.status = {true, k};
            return traj;
        }
        if ((k + 1) % record_stride == 0 || k + 1 == tg.n_steps) {
            traj.t.push_back(tg.time_of(k + 1));
            traj.y.push_back(y);
        }
    }
    return traj;
}

} // namespace mfw::paths
