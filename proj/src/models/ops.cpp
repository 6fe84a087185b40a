#include "mfw/models/ops.hpp"

#include <cmath>

#include "mfw/util/error.hpp"

namespace mfw::models {

using field::Bc;
using field::Field;
using field::Grid;
using field::NormKind;

void ModelSpec::validate() const {
    if (slow_grid.n_interior != fast_grid.n_interior)
        throw ConfigError("grid", "slow and fast grids must share n_interior");
    if (fast_grid.bc != Bc::Dirichlet)
        throw ConfigError("fast_grid.bc", "fast component uses a Dirichlet domain");
    switch (slow.variant) {
    case SlowVariant::PorousMedium:
        if (slow_grid.bc != Bc::Dirichlet)
            throw ConfigError("grid.bc", "porous medium variant requires dirichlet");
        if (slow.r < 1.0) throw ConfigError("slow.r", "requires r >= 1");
        break;
    case SlowVariant::CahnHilliard:
        if (slow_grid.bc != Bc::Neumann)
            throw ConfigError("grid.bc", "cahn-hilliard variant requires neumann");
        if (!(slow.pot_a > 0.0)) throw ConfigError("slow.pot_a", "requires a > 0");
        break;
    case SlowVariant::LinearDiagnostic:
        break;
    }
    if (fast.c1 < 0.0 || fast.c2 < 0.0)
        throw ConfigError("fast", "reaction coefficients must be nonnegative");
    for (const NoiseSpec* ns : {&noise_slow, &noise_fast}) {
        if (ns->n_modes < 1 || ns->n_modes > slow_grid.n_interior)
            throw ConfigError("noise.modes", "mode count must be in [1, n_interior]");
        if (static_cast<int>(ns->mode_coeffs.size()) != ns->n_modes)
            throw ConfigError("noise.coeffs", "needs one coefficient per mode");
        if (ns->dependence == NoiseDependence::LinearClipped && !(ns->cap > 0.0))
            throw ConfigError("noise.cap", "requires cap > 0");
    }
}

Field psi(const SlowOperatorSpec& spec, const Field& u) {
    Field out(u.grid());
    kern::active().pow_signed(out.data(), u.data(), spec.r, u.size());
    return out;
}

Field slow_drift(const ModelSpec& m, const Field& u) {
    switch (m.slow.variant) {
    case SlowVariant::PorousMedium: {
        if (u.grid().bc != Bc::Dirichlet)
            throw ConfigError("slow_drift", "porous medium requires a dirichlet field");
        return field::laplacian(psi(m.slow, u));
    }
    case SlowVariant::CahnHilliard: {
        if (u.grid().bc != Bc::Neumann)
            throw ConfigError("slow_drift", "cahn-hilliard requires a neumann field");
        Field ph(u.grid());
        for (std::size_t i = 0; i < u.size(); ++i) ph[i] = phi_pot(m.slow, u[i]);
        return field::axpby(-1.0, field::bilaplacian(u), 1.0, field::laplacian(ph));
    }
    case SlowVariant::LinearDiagnostic:
        return m.slow.a * field::laplacian(u);
    }
    throw DomainError("unknown slow variant");
}

double slow_pair(const ModelSpec& m, const Field& u, const Field& v) {
    if (m.slow.variant == SlowVariant::PorousMedium)
        return -field::inner(psi(m.slow, u), v, NormKind::l2());
    return field::inner(slow_drift(m, u), v, NormKind::l2());
}

double slow_v_norm(const ModelSpec& m, const Field& u) {
    switch (m.slow.variant) {
    case SlowVariant::PorousMedium:
        return field::norm(u, NormKind::lp(m.slow.r + 1.0));
    case SlowVariant::CahnHilliard: {
        // ||(I - lap) u||_L2, the discrete H^2 norm of the triple
        Field w = field::axpby(1.0, u, -1.0, field::laplacian(u));
        return field::norm(w, NormKind::l2());
    }
    case SlowVariant::LinearDiagnostic:
        return field::norm(u, NormKind::h1());
    }
    throw DomainError("unknown slow variant");
}

double slow_drift_dual_norm(const ModelSpec& m, const Field& u) {
    switch (m.slow.variant) {
    case SlowVariant::PorousMedium: {
        const double mexp = m.slow.r + 1.0;
        return field::norm(psi(m.slow, u), NormKind::lp(mexp / (mexp - 1.0)));
    }
    case SlowVariant::CahnHilliard: {
        field::ShiftedLaplaceSolver inv(u.grid(), 1.0);
        return field::norm(inv.solve(slow_drift(m, u)), NormKind::l2());
    }
    case SlowVariant::LinearDiagnostic: {
        field::ShiftedLaplaceSolver inv(u.grid(), 1.0);
        const Field a = slow_drift(m, u);
        return std::sqrt(field::dot_l2(a, inv.solve(a)));
    }
    }
    throw DomainError("unknown slow variant");
}

Field coupling_apply(const CouplingSpec& c, const Field& x, const Field& y,
                     const Grid& out_grid) {
    if (x.size() != y.size()) throw ConfigError("coupling", "grids must share n_interior");
    Field out(out_grid);
    if (c.variant == CouplingVariant::Affine) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = c.f0_const + c.gain_x * x[i] + c.gain_y * y[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.gain * std::sin(y[i]);
    }
    return out;
}

Field fast_drift(const ModelSpec& m, const Field& x, const Field& y) {
    if (x.size() != y.size()) throw ConfigError("fast_drift", "grids must share n_interior");
    Field out = field::laplacian(y);
    Field reac(y.grid());
    kern::active().cubic_reaction(reac.data(), m.fast.c1, m.fast.c2, y.data(), y.size());
    kern::active().axpy(out.data(), 1.0, reac.data(), out.size());
    const Field g = coupling_apply(m.fast.g, x, y, y.grid());
    kern::active().axpy(out.data(), 1.0, g.data(), out.size());
    return out;
}

double fast_pair(const ModelSpec& m, const Field& x, const Field& y, const Field& v) {
    return field::inner(fast_drift(m, x, y), v, NormKind::l2());
}

double fast_drift_dual_norm(const ModelSpec& m, const Field& x, const Field& y) {
    field::ShiftedLaplaceSolver inv(y.grid(), 1.0);
    const Field a = fast_drift(m, x, y);
    return std::sqrt(field::dot_l2(a, inv.solve(a)));
}

double noise_multiplier(const NoiseSpec& spec, const Field& state, NormKind hkind) {
    if (spec.dependence == NoiseDependence::Additive) return 1.0;
    return std::min(1.0 + spec.slope * field::norm(state, hkind), spec.cap);
}

Field noise_apply(const NoiseSpec& spec, const Field& state, NormKind hkind,
                  std::span<const double> z) {
    if (z.size() != static_cast<std::size_t>(spec.n_modes))
        throw DomainError("noise_apply: z length must equal n_modes");
    const double mult = noise_multiplier(spec, state, hkind);
    Field out(state.grid());
    for (int k = 0; k < spec.n_modes; ++k) {
        const double c = mult * spec.mode_coeffs[static_cast<std::size_t>(k)] *
                         z[static_cast<std::size_t>(k)];
        if (c == 0.0) continue;
        const Field e = field::eigenmode(state.grid(), k + 1);
        kern::active().axpy(out.data(), c, e.data(), out.size());
    }
    return out;
}

double noise_hs_norm_sq(const NoiseSpec& spec, const Field& state, NormKind hkind) {
    const double mult = noise_multiplier(spec, state, hkind);
    return mult * mult * spec.coeff_sq_sum();
}

double fast_noise_lipschitz_y(const ModelSpec& m) {
    if (m.noise_fast.dependence == NoiseDependence::Additive) return 0.0;
    return m.noise_fast.slope * std::sqrt(m.noise_fast.coeff_sq_sum());
}

double dissipativity_gap(const ModelSpec& m) {
    const double lambda1 = field::laplace_eigenvalue(m.fast_grid, 1);
    const double lb2 = fast_noise_lipschitz_y(m);
    return 2.0 * lambda1 - 2.0 * m.fast.lg() - lb2 * lb2;
}

void slow_explicit_drift(const ModelSpec& m, const Field& x, Field& out, Field& tmp) {
    switch (m.slow.variant) {
    case SlowVariant::LinearDiagnostic:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
        return;
    case SlowVariant::PorousMedium:
        kern::active().pow_signed(tmp.data(), x.data(), m.slow.r, x.size());
        field::laplacian_into(x.grid(), tmp.values(), out.values());
        field::laplacian_into(x.grid(), x.values(), tmp.values());
        kern::active().axpy(out.data(), -m.slow.pm_stab(), tmp.data(), out.size());
        return;
    case SlowVariant::CahnHilliard:
        for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = phi_pot(m.slow, x[i]);
        field::laplacian_into(x.grid(), tmp.values(), out.values());
        return;
    }
}

void slow_explicit_jacobian_t(const ModelSpec& m, const Field& x, const Field& lam,
                              Field& out, Field& tmp) {
    switch (m.slow.variant) {
    case SlowVariant::LinearDiagnostic:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
        return;
    case SlowVariant::PorousMedium: {
        // (lap diag(Psi'))^T = diag(Psi') lap
        field::laplacian_into(x.grid(), lam.values(), tmp.values());
        const double r = m.slow.r;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double s = std::fabs(x[i]);
            const double dpsi = s == 0.0 && r < 1.0 ? 0.0 : r * std::pow(s, r - 1.0);
            out[i] = dpsi * tmp[i] - m.slow.pm_stab() * tmp[i];
        }
        return;
    }
    case SlowVariant::CahnHilliard:
        field::laplacian_into(x.grid(), lam.values(), tmp.values());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = phi_pot_prime(m.slow, x[i]) * tmp[i];
        return;
    }
}

SlowImplicit::SlowImplicit(const ModelSpec& m, double dt) : grid_(m.slow_grid) {
    switch (m.slow.variant) {
    case SlowVariant::LinearDiagnostic:
        lin_ = field::ShiftedLaplaceSolver(m.slow_grid, dt * m.slow.a);
        break;
    case SlowVariant::PorousMedium:
        lin_ = field::ShiftedLaplaceSolver(m.slow_grid, dt * m.slow.pm_stab());
        break;
    case SlowVariant::CahnHilliard:
        ch_ = true;
        penta_ = field::BilaplaceSolver(m.slow_grid, dt);
        break;
    }
}

void SlowImplicit::solve(std::span<const double> rhs, std::span<double> x) const {
    if (ch_) penta_.solve(rhs, x);
    else lin_.solve(rhs, x);
}

Field SlowImplicit::solve(const Field& rhs) const {
    Field x(grid_);
    solve(rhs.values(), x.values());
    return x;
}

} // namespace mfw::models
